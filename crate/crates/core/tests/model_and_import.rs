use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use proptest::prelude::*;
use tagscope_core::fixtures;
use tagscope_core::import::{
    import_project, list_remote_projects, update_project, ImportError, RemoteCredentials,
};
use tagscope_core::model::{
    load_project, parse_project, save_project, to_canonical_json, validate_project, Annotation,
    ModelError, Project, Span, Tag, Tagset, Text,
};

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn creds(dir: &Path) -> RemoteCredentials {
    RemoteCredentials::new(dir.to_string_lossy(), "fixture-key")
}

/// Copy of the remote fixture directory that a test may edit.
fn scratch_remote() -> tempfile::TempDir {
    let tmp = tempfile::tempdir().unwrap();
    let src = fixtures_dir().join("remote");
    fs::create_dir_all(tmp.path().join("projects")).unwrap();
    fs::copy(src.join("index.json"), tmp.path().join("index.json")).unwrap();
    for e in fs::read_dir(src.join("projects")).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), tmp.path().join("projects").join(e.file_name())).unwrap();
    }
    tmp
}

fn edit_payload(dir: &Path, id: &str, f: impl FnOnce(&mut serde_json::Value)) {
    let path = dir.join("projects").join(format!("{id}.json"));
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    f(&mut v);
    fs::write(path, serde_json::to_string(&v).unwrap()).unwrap();
}

#[test]
fn lists_fixture_projects() {
    let list = list_remote_projects(&creds(&fixtures_dir().join("remote"))).unwrap();
    let ids: Vec<_> = list.iter().map(|d| d.id.as_str()).collect();
    assert_eq!(ids, ["piyyut-remote", "glory-remote"]);
}

#[test]
fn bad_key_and_missing_endpoint() {
    let bad = RemoteCredentials::new(fixtures_dir().join("remote").to_string_lossy(), "wrong");
    assert!(matches!(
        list_remote_projects(&bad),
        Err(ImportError::Authentication(_))
    ));
    let gone = RemoteCredentials::new("/nonexistent/remote", "fixture-key");
    assert!(matches!(
        list_remote_projects(&gone),
        Err(ImportError::Network { .. })
    ));
}

#[test]
fn import_matches_golden_and_is_idempotent() {
    let c = creds(&fixtures_dir().join("remote"));
    let start = Instant::now();
    let first = import_project(&c, "piyyut-remote").unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    let golden = load_project(fixtures_dir().join("golden/piyyut-remote.json")).unwrap();
    assert_eq!(first, golden);
    assert!(validate_project(&first).is_empty());
    assert_eq!(import_project(&c, "piyyut-remote").unwrap(), first);
    assert!(matches!(
        import_project(&c, "nope"),
        Err(ImportError::UnknownProject(_))
    ));
}

#[test]
fn import_rejects_dangling_annotation() {
    let tmp = scratch_remote();
    edit_payload(tmp.path(), "glory-remote", |v| {
        v["annotations"][0]["text"] = "missing-text".into();
    });
    assert!(matches!(
        import_project(&creds(tmp.path()), "glory-remote"),
        Err(ImportError::Translation(_))
    ));
}

#[test]
fn update_with_added_annotation() {
    let tmp = scratch_remote();
    let c = creds(tmp.path());
    let existing = import_project(&c, "glory-remote").unwrap();
    assert_eq!(
        update_project(&c, "glory-remote", &existing).unwrap(),
        existing
    );

    edit_payload(tmp.path(), "glory-remote", |v| {
        v["annotations"].as_array_mut().unwrap().insert(
            0,
            serde_json::json!({"text": "glory-1", "tag": "simile", "ranges": [[150, 160]]}),
        );
    });
    let updated = update_project(&c, "glory-remote", &existing).unwrap();
    assert_eq!(updated.annotations.len(), existing.annotations.len() + 1);
    assert_eq!(
        &updated.annotations[..existing.annotations.len()],
        &existing.annotations[..]
    );
    assert_eq!(
        updated.annotations.last().unwrap().ranges,
        vec![Span::new(150, 160)]
    );
}

#[test]
fn update_with_deleted_text() {
    let tmp = scratch_remote();
    let c = creds(tmp.path());
    let existing = import_project(&c, "piyyut-remote").unwrap();
    edit_payload(tmp.path(), "piyyut-remote", |v| {
        v["texts"]
            .as_array_mut()
            .unwrap()
            .retain(|t| t["id"] != "poem-04");
        v["annotations"]
            .as_array_mut()
            .unwrap()
            .retain(|a| a["text"] != "poem-04");
    });
    let updated = update_project(&c, "piyyut-remote", &existing).unwrap();
    assert!(updated.text("poem-04").is_none());
    assert!(updated
        .annotations
        .iter()
        .all(|a| a.text.as_str() != "poem-04"));
    let kept: Vec<_> = existing
        .annotations
        .iter()
        .filter(|a| a.text.as_str() != "poem-04")
        .collect();
    assert_eq!(updated.annotations.iter().collect::<Vec<_>>(), kept);
    assert!(matches!(
        update_project(&c, "glory-remote", &existing),
        Err(ImportError::NotFromRemote { .. })
    ));
}

#[test]
fn secrets_never_persisted() {
    let tmp = scratch_remote();
    let secret = "fixture-key";
    let c = creds(tmp.path());
    let p = import_project(&c, "glory-remote").unwrap();
    let out = tmp.path().join("saved.json");
    save_project(&p, &out).unwrap();
    assert!(!fs::read_to_string(&out).unwrap().contains(secret));
    assert!(!format!("{c:?} {p:?}").contains(secret));
    let err = import_project(
        &RemoteCredentials::new(tmp.path().to_string_lossy(), "leaky-secret"),
        "glory-remote",
    )
    .unwrap_err();
    assert!(!err.to_string().contains("leaky-secret"));
}

#[test]
fn fixture_corpus_loads() {
    let p = load_project(fixtures_dir().join("glory.json")).unwrap();
    assert_eq!(p.annotations.len(), 12);
    let empty =
        parse_project(r#"{"id":"e","name":"empty","texts":[],"tagsets":[],"annotations":[]}"#)
            .unwrap();
    assert!(empty.texts.is_empty());
    let mut bad = fixtures::glory_poem();
    bad.annotations[0].ranges = vec![Span::new(0, 5), Span::new(3, 9)];
    assert!(matches!(
        parse_project(&to_canonical_json(&bad)),
        Err(ModelError::Invalid(_))
    ));
}

fn arbitrary_project() -> impl Strategy<Value = Project> {
    (
        prop::collection::vec("[a-zא-ת ]{0,40}", 0..4),
        prop::collection::vec((0usize..4, 0usize..3, 0usize..50, 0usize..10), 0..10),
        prop::collection::vec(prop::option::of(0usize..3), 3),
    )
        .prop_map(|(bodies, anns, parents)| {
            let mut p = Project::new("p", "arb");
            for (i, b) in bodies.iter().enumerate() {
                p.texts
                    .push(Text::new(format!("t{i}"), format!("title {i}"), b.clone()));
            }
            let tags = parents
                .iter()
                .enumerate()
                .map(|(i, parent)| Tag {
                    id: format!("g{i}").into(),
                    name: format!("tag{i}"),
                    color: "#123abc".into(),
                    parent: parent.map(|q| format!("g{q}").into()),
                })
                .collect();
            p.tagsets.push(Tagset {
                id: "ts".into(),
                name: "ts".into(),
                tags,
            });
            for (i, (t, g, s, w)) in anns.into_iter().enumerate() {
                p.annotations.push(Annotation {
                    id: format!("a{i}").into(),
                    text: format!("t{t}").into(),
                    tag: format!("g{g}").into(),
                    ranges: vec![Span::new(s, s + w)],
                });
            }
            p
        })
}

proptest! {
    #[test]
    fn validate_is_total_and_round_trip_holds(p in arbitrary_project()) {
        let violations = validate_project(&p);
        let json = to_canonical_json(&p);
        match parse_project(&json) {
            Ok(back) => {
                prop_assert!(violations.is_empty());
                prop_assert_eq!(back, p);
            }
            Err(ModelError::Invalid(v)) => prop_assert_eq!(v, violations),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }
}
