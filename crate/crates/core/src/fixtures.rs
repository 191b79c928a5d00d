//! Deterministic synthetic corpora.
//!
//! Bodies are Hebrew word salad; annotations follow the placement patterns
//! each builder documents. Nothing here is real corpus data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Annotation, Project, Span, Tag, Tagset, Text};

pub const METAPHOR: &str = "metaphor";
pub const EPITHET: &str = "epithet";
pub const SIMILE: &str = "simile";

const WORDS: &[&str] = &[
    "אל",
    "רם",
    "ונשא",
    "שוכן",
    "עד",
    "מלך",
    "עולם",
    "אור",
    "גדול",
    "קדוש",
    "שמים",
    "ארץ",
    "כבוד",
    "הדר",
    "עוז",
    "צדק",
    "משפט",
    "חסד",
    "אמת",
    "ישראל",
    "נורא",
    "תהילה",
];

/// Figurative-language tagset: metaphor (with noun, verb, and synecdoche
/// subtypes), epithet, and simile.
pub fn figurative_tagset() -> Tagset {
    Tagset {
        id: "figurative".into(),
        name: "Figurative language".into(),
        tags: vec![
            Tag::new(METAPHOR, "metaphor", "#1f4fd6"),
            Tag::new("metaphor-noun", "noun", "#5b7fe0").with_parent(METAPHOR),
            Tag::new("metaphor-verb", "verb", "#8fa7ea").with_parent(METAPHOR),
            Tag::new("synecdoche", "synecdoche", "#c2cff4").with_parent(METAPHOR),
            Tag::new(EPITHET, "epithet", "#8e44ad"),
            Tag::new(SIMILE, "simile", "#d62728"),
        ],
    }
}

/// Hebrew filler of exactly `len` code points.
pub fn hebrew_body(len: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut body = String::new();
    let mut count = 0;
    while count < len {
        if count > 0 {
            body.push(' ');
            count += 1;
        }
        let w = WORDS[rng.random_range(0..WORDS.len())];
        body.push_str(w);
        count += w.chars().count();
    }
    body.chars().take(len).collect()
}

struct Builder {
    project: Project,
    next: usize,
}

impl Builder {
    fn new(id: &str, name: &str) -> Self {
        let mut project = Project::new(id, name);
        project.tagsets.push(figurative_tagset());
        Self { project, next: 0 }
    }

    fn text(&mut self, id: &str, title: &str, len: usize) {
        let seed = self.project.texts.len() as u64 + 1;
        self.project
            .texts
            .push(Text::new(id, title, hebrew_body(len, seed)));
    }

    fn annotate(&mut self, text: &str, tag: &str, start: usize, end: usize) {
        self.next += 1;
        self.project.annotations.push(Annotation {
            id: format!("a{:04}", self.next).into(),
            text: text.into(),
            tag: tag.into(),
            ranges: vec![Span::new(start, end)],
        });
    }

    /// Scatters `count` spans of `tag` over `[from, to)` without overlap.
    fn scatter(
        &mut self,
        text: &str,
        tag: &str,
        from: usize,
        to: usize,
        count: usize,
        rng: &mut ChaCha8Rng,
    ) {
        if count == 0 || to <= from {
            return;
        }
        let slot = (to - from) / count;
        for k in 0..count {
            let base = from + k * slot;
            let width = rng.random_range((slot / 4).max(1)..=(slot * 3 / 4).max(1));
            let offset = rng.random_range(0..=(slot - width.min(slot)));
            let start = base + offset;
            self.annotate(text, tag, start, (start + width).min(to));
        }
    }

    fn finish(self) -> Project {
        self.project
    }
}

/// One 240-code-point poem with 12 annotations: six in the metaphor subtree
/// (two direct, two noun, two verb), five epithets, and one simile.
pub fn glory_poem() -> Project {
    let mut b = Builder::new("glory", "Glory to the Supreme");
    b.text("glory-1", "תהילה לרם", 240);
    let t = "glory-1";
    let spans = [
        (METAPHOR, 0, 8),
        (EPITHET, 10, 18),
        ("metaphor-noun", 20, 30),
        (EPITHET, 32, 40),
        ("metaphor-verb", 42, 50),
        (EPITHET, 52, 62),
        (METAPHOR, 64, 72),
        (EPITHET, 74, 84),
        ("metaphor-noun", 86, 96),
        (SIMILE, 98, 108),
        (EPITHET, 200, 210),
        ("metaphor-verb", 220, 232),
    ];
    for (tag, s, e) in spans {
        b.annotate(t, tag, s, e);
    }
    b.finish()
}

/// Middle span `[0.45·len, 0.8·len)` of [`avodah_poem`] that carries no annotations.
pub fn avodah_gap(len: usize) -> Span {
    Span::new(len * 45 / 100, len * 80 / 100)
}

/// A poem dense with figurative tags in its first 45%, bare through 80%,
/// with a sparse resurgence at the end.
pub fn avodah_poem() -> Project {
    let len = 600;
    let mut b = Builder::new("avodah", "Avodah");
    b.text("avodah-1", "אתה כוננת", len);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gap = avodah_gap(len);
    b.scatter("avodah-1", METAPHOR, 0, gap.start, 12, &mut rng);
    b.scatter("avodah-1", EPITHET, 0, gap.start, 8, &mut rng);
    b.scatter("avodah-1", SIMILE, 0, gap.start, 2, &mut rng);
    b.scatter("avodah-1", METAPHOR, gap.end, len, 2, &mut rng);
    b.scatter("avodah-1", EPITHET, gap.end, len, 1, &mut rng);
    b.finish()
}

/// Ten texts, 100 annotations; `metaphors` of them metaphors (direct or
/// subtype), the rest split between epithets and similes.
pub fn distribution_corpus(id: &str, name: &str, metaphors: usize) -> Project {
    assert!(metaphors <= 100);
    let mut b = Builder::new(id, name);
    for k in 0..10 {
        b.text(&format!("{id}-{k:02}"), &format!("{name} {}", k + 1), 500);
    }
    let subtypes = [METAPHOR, "metaphor-noun", "metaphor-verb", "synecdoche"];
    for n in 0..100 {
        let text = format!("{id}-{:02}", n % 10);
        let slot = n / 10;
        let tag = if n < metaphors {
            subtypes[n % subtypes.len()]
        } else if (n - metaphors) % 3 == 2 {
            SIMILE
        } else {
            EPITHET
        };
        b.annotate(&text, tag, slot * 50, slot * 50 + 20);
    }
    b.finish()
}

#[derive(Clone, Copy)]
enum Shape {
    /// Dense first half, bare middle, sparse end.
    Avodah,
    Even,
    Late,
}

/// Twelve poems of varying length in three placement families
/// (Avodah-like, even, late-heavy), with seeded jitter.
pub fn gallery_corpus() -> Project {
    let mut b = Builder::new("piyyut", "Pre-classical Piyyut (synthetic)");
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    for k in 0..12 {
        let id = format!("poem-{k:02}");
        let len = 300 + 45 * k + rng.random_range(0..40);
        b.text(&id, &format!("שיר {}", k + 1), len);
        let shape = [Shape::Avodah, Shape::Even, Shape::Late][k % 3];
        let dense = 6 + rng.random_range(0..6);
        match shape {
            Shape::Avodah => {
                let gap = avodah_gap(len);
                b.scatter(&id, METAPHOR, 0, gap.start, dense, &mut rng);
                b.scatter(&id, METAPHOR, gap.end, len, 1 + k % 2, &mut rng);
                b.scatter(&id, EPITHET, 0, gap.start, 3 + k % 3, &mut rng);
            }
            Shape::Even => {
                b.scatter(&id, METAPHOR, 0, len, dense, &mut rng);
                b.scatter(&id, EPITHET, 0, len, 2 + k % 4, &mut rng);
            }
            Shape::Late => {
                b.scatter(&id, METAPHOR, len / 2, len, dense, &mut rng);
                b.scatter(&id, EPITHET, len / 3, len, 1 + k % 3, &mut rng);
            }
        }
        if k % 4 != 3 {
            b.scatter(&id, SIMILE, 0, len, 1 + k % 2, &mut rng);
        }
    }
    b.finish()
}
