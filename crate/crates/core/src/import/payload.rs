use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{validate_project, Annotation, Project, Span, Tag, Tagset, Text};

use super::{ImportError, RemoteProjectDescriptor};

const DEFAULT_COLOR: &str = "#808080";

/// Project document as served by a remote. Same shape as the canonical
/// format, but ids, titles, and colors may be absent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemotePayload {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub texts: Vec<RemoteText>,
    #[serde(default)]
    pub tagsets: Vec<RemoteTagset>,
    #[serde(default)]
    pub annotations: Vec<RemoteAnnotation>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteText {
    pub id: Option<String>,
    #[serde(default)]
    pub title: Option<String>,
    pub body: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteTagset {
    pub id: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub tags: Vec<RemoteTag>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteTag {
    pub id: Option<String>,
    pub name: Option<String>,
    #[serde(default)]
    pub color: Option<String>,
    #[serde(default)]
    pub parent: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteAnnotation {
    #[serde(default)]
    pub id: Option<String>,
    pub text: Option<String>,
    pub tag: Option<String>,
    pub ranges: Option<Vec<Span>>,
}

fn required<T>(value: Option<T>, what: &str, owner: &str) -> Result<T, ImportError> {
    value.ok_or_else(|| ImportError::Translation(format!("{owner}: missing {what}")))
}

/// Content-derived id for annotations the remote did not name.
pub(crate) fn synthesized_annotation_id(text: &str, tag: &str, ranges: &[Span]) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.update([0]);
    h.update(tag.as_bytes());
    for r in ranges {
        h.update([0]);
        h.update(r.start.to_le_bytes());
        h.update(r.end.to_le_bytes());
    }
    format!("ann-{}", &hex::encode(h.finalize())[..16])
}

/// Translates a payload into a validated [`Project`] with id `descriptor.id`.
pub fn translate(
    payload: RemotePayload,
    descriptor: &RemoteProjectDescriptor,
) -> Result<Project, ImportError> {
    let mut project = Project::new(
        descriptor.id.as_str(),
        payload.name.unwrap_or_else(|| descriptor.name.clone()),
    );

    for (i, t) in payload.texts.into_iter().enumerate() {
        let owner = format!("text #{i}");
        let id = required(t.id, "id", &owner)?;
        let body = required(t.body, "body", &id)?;
        let title = t.title.unwrap_or_else(|| id.clone());
        project.texts.push(Text::new(id, title, body));
    }

    for (i, ts) in payload.tagsets.into_iter().enumerate() {
        let id = required(ts.id, "id", &format!("tagset #{i}"))?;
        let mut tags = Vec::with_capacity(ts.tags.len());
        for (k, tag) in ts.tags.into_iter().enumerate() {
            let tag_id = required(tag.id, "id", &format!("tag #{k} of {id}"))?;
            let name = required(tag.name, "name", &tag_id)?;
            tags.push(Tag {
                id: tag_id.into(),
                name,
                color: tag.color.unwrap_or_else(|| DEFAULT_COLOR.to_owned()),
                parent: tag.parent.map(Into::into),
            });
        }
        project.tagsets.push(Tagset {
            name: ts.name.unwrap_or_else(|| id.clone()),
            id: id.into(),
            tags,
        });
    }

    let texts: HashSet<String> = project.texts.iter().map(|t| t.id.to_string()).collect();
    let tags: HashSet<String> = project.tags().map(|t| t.id.to_string()).collect();
    for (i, a) in payload.annotations.into_iter().enumerate() {
        let owner = a.id.clone().unwrap_or_else(|| format!("annotation #{i}"));
        let text = required(a.text, "text", &owner)?;
        let tag = required(a.tag, "tag", &owner)?;
        let ranges = required(a.ranges, "ranges", &owner)?;
        if !texts.contains(&text) {
            return Err(ImportError::Translation(format!(
                "{owner}: references missing text {text}"
            )));
        }
        if !tags.contains(&tag) {
            return Err(ImportError::Translation(format!(
                "{owner}: references missing tag {tag}"
            )));
        }
        let id =
            a.id.unwrap_or_else(|| synthesized_annotation_id(&text, &tag, &ranges));
        project.annotations.push(Annotation {
            id: id.into(),
            text: text.into(),
            tag: tag.into(),
            ranges,
        });
    }

    let violations = validate_project(&project);
    if violations.is_empty() {
        Ok(project)
    } else {
        Err(ImportError::Invalid(violations))
    }
}
