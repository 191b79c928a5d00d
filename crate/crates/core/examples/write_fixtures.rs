//! Regenerates the JSON fixtures under `fixtures/` from `tagscope_core::fixtures`.
//!
//! `cargo run -p tagscope-core --example write_fixtures -- <fixtures dir>`

use std::fs;
use std::path::PathBuf;

use serde_json::json;
use tagscope_core::fixtures;
use tagscope_core::import::{import_project, RemoteCredentials};
use tagscope_core::model::{save_project, to_canonical_json, Project};

/// Remote-style payload: annotation ids dropped on every other annotation,
/// text titles dropped on every third text.
fn remote_payload(p: &Project) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(&to_canonical_json(p)).unwrap();
    v.as_object_mut().unwrap().remove("id");
    for (i, a) in v["annotations"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .enumerate()
    {
        if i % 2 == 1 {
            a.as_object_mut().unwrap().remove("id");
        }
    }
    for (i, t) in v["texts"].as_array_mut().unwrap().iter_mut().enumerate() {
        if i % 3 == 2 {
            t.as_object_mut().unwrap().remove("title");
        }
    }
    v
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    fs::create_dir_all(dir.join("remote/projects"))?;
    fs::create_dir_all(dir.join("golden"))?;

    save_project(&fixtures::glory_poem(), dir.join("glory.json"))?;
    save_project(&fixtures::avodah_poem(), dir.join("avodah.json"))?;
    save_project(&fixtures::gallery_corpus(), dir.join("piyyut.json"))?;
    save_project(
        &fixtures::distribution_corpus("psalms", "Psalms", 81),
        dir.join("psalms.json"),
    )?;
    save_project(
        &fixtures::distribution_corpus("piyyut-dist", "Piyyut", 60),
        dir.join("piyyut-distribution.json"),
    )?;

    let remote = [
        (
            "piyyut-remote",
            fixtures::gallery_corpus(),
            "2020-06-01T12:00:00Z",
        ),
        (
            "glory-remote",
            fixtures::glory_poem(),
            "2020-05-14T08:30:00Z",
        ),
    ];
    let mut descriptors = Vec::new();
    for (id, p, modified) in &remote {
        descriptors.push(json!({"id": id, "name": p.name, "last_modified": modified}));
        fs::write(
            dir.join(format!("remote/projects/{id}.json")),
            serde_json::to_string_pretty(&remote_payload(p))? + "\n",
        )?;
    }
    let index = json!({"keys": ["fixture-key"], "projects": descriptors});
    fs::write(
        dir.join("remote/index.json"),
        serde_json::to_string_pretty(&index)? + "\n",
    )?;

    let creds = RemoteCredentials::new(dir.join("remote").to_string_lossy(), "fixture-key");
    for (id, _, _) in &remote {
        save_project(
            &import_project(&creds, id)?,
            dir.join(format!("golden/{id}.json")),
        )?;
    }
    Ok(())
}
