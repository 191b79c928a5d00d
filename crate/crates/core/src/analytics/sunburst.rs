use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::model::{merge_spans, Project, Tag, TagId, TagTree};

use super::AnalyticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Number of annotations.
    #[default]
    Occurrences,
    /// Number of code points covered, per tag.
    Characters,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Project,
    Text(String),
}

/// Hierarchical tag counts. Counts roll up: a node counts every annotation
/// whose tag lies in its subtree. When a tag has both its own annotations and
/// annotated subtags, its own annotations appear as a `direct` child so that
/// child counts always sum to the parent count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SunburstNode {
    /// `None` for the synthetic root.
    pub tag: Option<TagId>,
    pub name: String,
    pub color: Option<String>,
    pub count: u64,
    /// Fraction of the parent's count; 1 at the root.
    pub share: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub direct: bool,
    pub children: Vec<SunburstNode>,
}

impl SunburstNode {
    pub fn child(&self, name: &str) -> Option<&SunburstNode> {
        self.children.iter().find(|c| c.name == name)
    }
}

fn direct_counts(
    project: &Project,
    scope: &Scope,
    mode: CountMode,
) -> Result<HashMap<TagId, u64>, AnalyticsError> {
    let in_scope = |text: &str| match scope {
        Scope::Project => true,
        Scope::Text(t) => t == text,
    };
    if let Scope::Text(t) = scope {
        if project.text(t).is_none() {
            return Err(AnalyticsError::UnknownText(t.clone()));
        }
    }
    let mut counts: HashMap<TagId, u64> = HashMap::new();
    match mode {
        CountMode::Occurrences => {
            for a in project
                .annotations
                .iter()
                .filter(|a| in_scope(a.text.as_str()))
            {
                *counts.entry(a.tag.clone()).or_default() += 1;
            }
        }
        CountMode::Characters => {
            let mut spans: HashMap<(&str, &TagId), Vec<_>> = HashMap::new();
            for a in project
                .annotations
                .iter()
                .filter(|a| in_scope(a.text.as_str()))
            {
                spans
                    .entry((a.text.as_str(), &a.tag))
                    .or_default()
                    .extend(a.ranges.iter().copied());
            }
            for ((_, tag), s) in spans {
                let covered: usize = merge_spans(s).iter().map(|s| s.len()).sum();
                *counts.entry(tag.clone()).or_default() += covered as u64;
            }
        }
    }
    Ok(counts)
}

fn build(
    tag: &Tag,
    tree: &TagTree<'_>,
    direct: &HashMap<TagId, u64>,
    depth: usize,
) -> SunburstNode {
    let own = direct.get(&tag.id).copied().unwrap_or(0);
    // Depth guard: validated projects are acyclic, this only protects raw input.
    let mut children: Vec<SunburstNode> = if depth > 64 {
        Vec::new()
    } else {
        tree.children(tag.id.as_str())
            .map(|c| build(c, tree, direct, depth + 1))
            .filter(|n| n.count > 0)
            .collect()
    };
    let below: u64 = children.iter().map(|c| c.count).sum();
    if !children.is_empty() && own > 0 {
        children.insert(
            0,
            SunburstNode {
                tag: Some(tag.id.clone()),
                name: tag.name.clone(),
                color: Some(tag.color.clone()),
                count: own,
                share: 0.0,
                direct: true,
                children: Vec::new(),
            },
        );
    }
    SunburstNode {
        tag: Some(tag.id.clone()),
        name: tag.name.clone(),
        color: Some(tag.color.clone()),
        count: own + below,
        share: 0.0,
        direct: false,
        children,
    }
}

fn assign_shares(node: &mut SunburstNode) {
    let total = node.count;
    for c in &mut node.children {
        c.share = if total == 0 {
            0.0
        } else {
            c.count as f64 / total as f64
        };
        assign_shares(c);
    }
}

/// Tag hierarchy with rolled-up counts over one text or the whole project.
pub fn sunburst(
    project: &Project,
    scope: &Scope,
    mode: CountMode,
) -> Result<SunburstNode, AnalyticsError> {
    let direct = direct_counts(project, scope, mode)?;
    let tree = project.tag_tree();
    let children: Vec<SunburstNode> = tree
        .roots()
        .map(|t| build(t, &tree, &direct, 0))
        .filter(|n| n.count > 0)
        .collect();
    let name = match scope {
        Scope::Project => project.name.clone(),
        Scope::Text(t) => project.text(t).map(|t| t.title.clone()).unwrap_or_default(),
    };
    let mut root = SunburstNode {
        tag: None,
        name,
        color: None,
        count: children.iter().map(|c| c.count).sum(),
        share: 1.0,
        direct: false,
        children,
    };
    assign_shares(&mut root);
    Ok(root)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub name: String,
    /// Share per compared project; `None` when the tag does not occur there.
    pub shares: Vec<Option<f64>>,
}

/// Top-level tag shares of several projects side by side, matched by tag name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionComparison {
    pub projects: Vec<String>,
    pub rows: Vec<DistributionRow>,
}

pub fn compare_distributions(projects: &[&Project], mode: CountMode) -> DistributionComparison {
    let mut rows: Vec<DistributionRow> = Vec::new();
    for (k, p) in projects.iter().enumerate() {
        let root = sunburst(p, &Scope::Project, mode).expect("project scope is always valid");
        for c in root.children {
            let row = match rows.iter().position(|r| r.name == c.name) {
                Some(i) => &mut rows[i],
                None => {
                    rows.push(DistributionRow {
                        name: c.name.clone(),
                        shares: vec![None; projects.len()],
                    });
                    rows.last_mut().unwrap()
                }
            };
            row.shares[k] = Some(c.share);
        }
    }
    DistributionComparison {
        projects: projects.iter().map(|p| p.name.clone()).collect(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Annotation, Span, Tagset, Text};

    fn project() -> Project {
        let mut p = Project::new("p", "corpus");
        p.texts.push(Text::new("t", "poem", "x".repeat(30)));
        p.texts.push(Text::new("u", "other", "y".repeat(30)));
        p.tagsets.push(Tagset {
            id: "ts".into(),
            name: "figures".into(),
            tags: vec![
                Tag::new("m", "metaphor", "#800080"),
                Tag::new("mv", "verb", "#a000a0").with_parent("m"),
                Tag::new("mn", "noun", "#c000c0").with_parent("m"),
                Tag::new("s", "simile", "#0000ff"),
                Tag::new("e", "epithet", "#ff0000"),
            ],
        });
        let spans = [
            ("t", "m", 0, 5),
            ("t", "mv", 5, 10),
            ("t", "mv", 8, 12),
            ("t", "s", 20, 22),
            ("u", "mn", 0, 3),
        ];
        for (i, (text, tag, s, e)) in spans.into_iter().enumerate() {
            p.annotations.push(Annotation {
                id: format!("a{i}").into(),
                text: text.into(),
                tag: tag.into(),
                ranges: vec![Span::new(s, e)],
            });
        }
        p
    }

    fn check_conservation(node: &SunburstNode) {
        if !node.children.is_empty() {
            assert_eq!(
                node.children.iter().map(|c| c.count).sum::<u64>(),
                node.count
            );
            let shares: f64 = node.children.iter().map(|c| c.share).sum();
            assert!((shares - 1.0).abs() < 1e-9);
        }
        node.children.iter().for_each(check_conservation);
    }

    #[test]
    fn rollup_and_direct_child() {
        let root = sunburst(&project(), &Scope::Project, CountMode::Occurrences).unwrap();
        assert_eq!(root.count, 5);
        let m = root.child("metaphor").unwrap();
        assert_eq!(m.count, 4);
        assert_eq!(m.share, 0.8);
        assert!(m.children[0].direct);
        assert_eq!(m.children[0].count, 1);
        assert_eq!(m.child("verb").unwrap().count, 2);
        assert!(root.child("epithet").is_none());
        check_conservation(&root);
    }

    #[test]
    fn text_scope_and_character_mode() {
        let root = sunburst(&project(), &Scope::Text("t".into()), CountMode::Characters).unwrap();
        assert_eq!(root.name, "poem");
        let m = root.child("metaphor").unwrap();
        assert_eq!(m.count, 5 + 7);
        assert_eq!(root.child("simile").unwrap().count, 2);
        check_conservation(&root);
        assert!(sunburst(
            &project(),
            &Scope::Text("zz".into()),
            CountMode::Occurrences
        )
        .is_err());
    }

    #[test]
    fn single_annotation_has_full_share() {
        let mut p = project();
        p.annotations.truncate(1);
        let root = sunburst(&p, &Scope::Project, CountMode::Occurrences).unwrap();
        assert_eq!(root.children.len(), 1);
        assert_eq!(root.children[0].share, 1.0);
    }

    #[test]
    fn comparison_aligns_by_name() {
        let a = project();
        let mut b = project();
        b.annotations.retain(|a| a.tag.as_str() == "s");
        let cmp = compare_distributions(&[&a, &b], CountMode::Occurrences);
        assert_eq!(cmp.rows[0].name, "metaphor");
        assert_eq!(cmp.rows[0].shares, vec![Some(0.8), None]);
        assert_eq!(cmp.rows[1].shares, vec![Some(0.2), Some(1.0)]);
    }
}
