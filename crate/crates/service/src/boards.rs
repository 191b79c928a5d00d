//! Boards: named categories into which a scholar sorts a project's texts.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use tagscope_core::model::{Project, ProjectId, TextId};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("text is not on this board: {0}")]
    UnknownText(String),
    #[error("no such category: {0}")]
    UnknownCategory(String),
    #[error("duplicate category: {0}")]
    DuplicateCategory(String),
    #[error("names must not be empty")]
    EmptyName,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub name: String,
    pub texts: Vec<TextId>,
}

/// Every project text sits in exactly one place: a category or `uncategorized`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Board {
    pub id: String,
    pub project: ProjectId,
    pub name: String,
    pub categories: Vec<Category>,
    pub uncategorized: Vec<TextId>,
}

impl Board {
    /// A board with every text uncategorized.
    pub fn new(
        id: impl Into<String>,
        project: &Project,
        name: impl Into<String>,
        categories: Vec<String>,
    ) -> Result<Self, BoardError> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(BoardError::EmptyName);
        }
        let mut board = Self {
            id: id.into(),
            project: project.id.clone(),
            name,
            categories: Vec::new(),
            uncategorized: project.texts.iter().map(|t| t.id.clone()).collect(),
        };
        board.set_categories(categories)?;
        Ok(board)
    }

    /// Removes `text` from wherever it is and appends it to `category`
    /// (`None` means uncategorized).
    pub fn move_text(&mut self, text: &str, category: Option<&str>) -> Result<(), BoardError> {
        if let Some(c) = category {
            if !self.categories.iter().any(|k| k.name == c) {
                return Err(BoardError::UnknownCategory(c.to_owned()));
            }
        }
        let id = self
            .take(text)
            .ok_or_else(|| BoardError::UnknownText(text.to_owned()))?;
        match category {
            None => self.uncategorized.push(id),
            Some(c) => self
                .categories
                .iter_mut()
                .find(|k| k.name == c)
                .expect("category checked above")
                .texts
                .push(id),
        }
        Ok(())
    }

    /// Replaces the category list. Categories keep their texts by name; texts
    /// of dropped categories become uncategorized.
    pub fn set_categories(&mut self, names: Vec<String>) -> Result<(), BoardError> {
        let mut seen = HashSet::new();
        for n in &names {
            if n.trim().is_empty() {
                return Err(BoardError::EmptyName);
            }
            if !seen.insert(n.as_str()) {
                return Err(BoardError::DuplicateCategory(n.clone()));
            }
        }
        let mut old = std::mem::take(&mut self.categories);
        self.categories = names
            .into_iter()
            .map(|name| match old.iter().position(|c| c.name == name) {
                Some(k) => old.swap_remove(k),
                None => Category {
                    name,
                    texts: Vec::new(),
                },
            })
            .collect();
        for dropped in old {
            self.uncategorized.extend(dropped.texts);
        }
        Ok(())
    }

    /// Drops texts the project no longer has and adds new ones as uncategorized.
    /// Returns whether anything changed.
    pub fn reconcile(&mut self, project: &Project) -> bool {
        let live: HashSet<&str> = project.texts.iter().map(|t| t.id.as_str()).collect();
        let before = self.placed().count();
        for c in &mut self.categories {
            c.texts.retain(|t| live.contains(t.as_str()));
        }
        self.uncategorized.retain(|t| live.contains(t.as_str()));
        let mut changed = self.placed().count() != before;
        let placed: HashSet<String> = self.placed().map(|t| t.to_string()).collect();
        for t in &project.texts {
            if !placed.contains(t.id.as_str()) {
                self.uncategorized.push(t.id.clone());
                changed = true;
            }
        }
        changed
    }

    /// Checks the placement invariant against `project`.
    pub fn check(&self, project: &Project) -> Result<(), String> {
        let mut seen = HashSet::new();
        for t in self.placed() {
            if project.text(t.as_str()).is_none() {
                return Err(format!("unknown text {t}"));
            }
            if !seen.insert(t.as_str()) {
                return Err(format!("text {t} placed twice"));
            }
        }
        if seen.len() != project.texts.len() {
            return Err("board does not place every text".into());
        }
        Ok(())
    }

    /// Category name holding `text`; `Some(None)` means uncategorized.
    pub fn location(&self, text: &str) -> Option<Option<&str>> {
        if self.uncategorized.iter().any(|t| t.as_str() == text) {
            return Some(None);
        }
        self.categories
            .iter()
            .find(|c| c.texts.iter().any(|t| t.as_str() == text))
            .map(|c| Some(c.name.as_str()))
    }

    fn placed(&self) -> impl Iterator<Item = &TextId> {
        self.categories
            .iter()
            .flat_map(|c| c.texts.iter())
            .chain(self.uncategorized.iter())
    }

    fn take(&mut self, text: &str) -> Option<TextId> {
        let lists = self
            .categories
            .iter_mut()
            .map(|c| &mut c.texts)
            .chain(std::iter::once(&mut self.uncategorized));
        for list in lists {
            if let Some(k) = list.iter().position(|t| t.as_str() == text) {
                return Some(list.remove(k));
            }
        }
        None
    }
}
