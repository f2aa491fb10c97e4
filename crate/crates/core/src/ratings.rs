//! Ratings-file ingestion with item filtering and per-user train/test sampling.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{FgsrError, Result};
use crate::matrix::seeded_rng;
use crate::observations::ObservationSet;

const SPLIT_STREAM: u64 = 11;
pub const DEFAULT_MIN_RATINGS_PER_ITEM: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    /// Dense user index.
    pub user: usize,
    /// Dense item index.
    pub item: usize,
    pub rating: f64,
    pub split: Split,
}

/// Ratings with users and items re-indexed densely in order of first appearance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingsTable {
    /// Original identifier of every dense user index.
    pub user_ids: Vec<String>,
    /// Original identifier of every dense item index.
    pub item_ids: Vec<String>,
    pub records: Vec<RatingRecord>,
}

impl RatingsTable {
    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    fn observations(&self, split: Split) -> ObservationSet {
        let entries = self
            .records
            .iter()
            .filter(|r| r.split == split)
            .map(|r| (r.user, r.item, r.rating))
            .collect();
        ObservationSet::new(self.n_users(), self.n_items(), entries)
            .expect("records have distinct in-range indices")
    }

    /// Training entries as a users × items observation set.
    pub fn train(&self) -> ObservationSet {
        self.observations(Split::Train)
    }

    pub fn test(&self) -> ObservationSet {
        self.observations(Split::Test)
    }

    /// Smallest and largest rating.
    pub fn rating_range(&self) -> (f64, f64) {
        self.records
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.rating), hi.max(r.rating))
            })
    }

    /// Drops items with fewer than `min_ratings` records and re-indexes; the
    /// split tags of the surviving records are kept.
    pub fn filter_items(&self, min_ratings: usize) -> Result<RatingsTable> {
        let raw: Vec<(String, String, f64, Split)> = self
            .records
            .iter()
            .map(|r| {
                (
                    self.user_ids[r.user].clone(),
                    self.item_ids[r.item].clone(),
                    r.rating,
                    r.split,
                )
            })
            .collect();
        build(raw, min_ratings)
    }
}

fn build(raw: Vec<(String, String, f64, Split)>, min_ratings: usize) -> Result<RatingsTable> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for (_, item, _, _) in &raw {
        *counts.entry(item.as_str()).or_default() += 1;
    }
    let mut user_index: HashMap<String, usize> = HashMap::new();
    let mut item_index: HashMap<String, usize> = HashMap::new();
    let mut table = RatingsTable {
        user_ids: Vec::new(),
        item_ids: Vec::new(),
        records: Vec::new(),
    };
    for (user, item, rating, split) in &raw {
        if counts[item.as_str()] < min_ratings {
            continue;
        }
        let u = *user_index.entry(user.clone()).or_insert_with(|| {
            table.user_ids.push(user.clone());
            table.user_ids.len() - 1
        });
        let i = *item_index.entry(item.clone()).or_insert_with(|| {
            table.item_ids.push(item.clone());
            table.item_ids.len() - 1
        });
        table.records.push(RatingRecord {
            user: u,
            item: i,
            rating: *rating,
            split: *split,
        });
    }
    if table.records.is_empty() {
        return Err(FgsrError::EmptyRatings { min_ratings });
    }
    Ok(table)
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c == ':' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Reads `user item rating [timestamp]` records separated by whitespace,
/// commas or `::`. Blank lines and lines starting with `#` are skipped, as is
/// a first line whose rating field is not numeric (a header).
pub fn parse_ratings(text: &str, path: &str) -> Result<Vec<(String, String, f64)>> {
    let mut out = Vec::new();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    let mut first = true;
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = split_fields(trimmed);
        let is_first = std::mem::replace(&mut first, false);
        let parse_err = |reason: String| FgsrError::Parse {
            path: path.to_string(),
            line: line_no,
            reason,
        };
        if !(3..=4).contains(&fields.len()) {
            return Err(parse_err(format!(
                "expected `user item rating [timestamp]`, found {} fields",
                fields.len()
            )));
        }
        let rating: f64 = match fields[2].parse() {
            Ok(v) => v,
            Err(_) if is_first => continue,
            Err(_) => return Err(parse_err(format!("rating `{}` is not a number", fields[2]))),
        };
        if !rating.is_finite() {
            return Err(parse_err(format!("rating `{}` is not finite", fields[2])));
        }
        let key = (fields[0].to_string(), fields[1].to_string());
        if let Some(prev) = seen.insert(key.clone(), line_no) {
            return Err(parse_err(format!(
                "user {} rated item {} again (first on line {prev})",
                key.0, key.1
            )));
        }
        out.push((key.0, key.1, rating));
    }
    Ok(out)
}

/// Loads a ratings file, removes items with fewer than
/// `min_ratings_per_item` ratings, and puts `round(sample_fraction·count)`
/// randomly chosen ratings of every user into the training split.
pub fn ingest_ratings(
    path: &Path,
    min_ratings_per_item: usize,
    sample_fraction: f64,
    seed: u64,
) -> Result<RatingsTable> {
    let text = fs::read_to_string(path)?;
    ingest_ratings_text(
        &text,
        &path.display().to_string(),
        min_ratings_per_item,
        sample_fraction,
        seed,
    )
}

/// [`ingest_ratings`] on in-memory text; `path` is used in error messages.
pub fn ingest_ratings_text(
    text: &str,
    path: &str,
    min_ratings_per_item: usize,
    sample_fraction: f64,
    seed: u64,
) -> Result<RatingsTable> {
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(FgsrError::invalid(
            "sample_fraction",
            format!("{sample_fraction} is outside (0, 1]"),
        ));
    }
    let raw = parse_ratings(text, path)?
        .into_iter()
        .map(|(u, i, r)| (u, i, r, Split::Test))
        .collect();
    let mut table = build(raw, min_ratings_per_item)?;

    let mut by_user: Vec<Vec<usize>> = vec![Vec::new(); table.n_users()];
    for (k, r) in table.records.iter().enumerate() {
        by_user[r.user].push(k);
    }
    let mut rng = seeded_rng(seed, SPLIT_STREAM);
    for mut idx in by_user {
        let take = (sample_fraction * idx.len() as f64).round() as usize;
        idx.shuffle(&mut rng);
        for &k in &idx[..take.min(idx.len())] {
            table.records[k].split = Split::Train;
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> String {
        let mut s = String::from("# user item rating timestamp\n");
        // Items 10 and 11 have five raters, item 12 only four.
        for u in 1..=5 {
            s.push_str(&format!("{u} 10 {} 100\n", u % 5 + 1));
            s.push_str(&format!("{u},11,{}\n", (u + 2) % 5 + 1));
        }
        for u in 1..=4 {
            s.push_str(&format!("{u}::12::3::99\n"));
        }
        s
    }

    #[test]
    fn sparse_items_are_removed() {
        let t = ingest_ratings_text(&fixture(), "f", 5, 1.0, 0).unwrap();
        assert_eq!(t.item_ids, vec!["10", "11"]);
        assert_eq!(t.n_users(), 5);
        assert_eq!(t.records.len(), 10);
        let t4 = ingest_ratings_text(&fixture(), "f", 4, 1.0, 0).unwrap();
        assert_eq!(t4.n_items(), 3);
    }

    #[test]
    fn full_fraction_puts_everything_in_train() {
        let t = ingest_ratings_text(&fixture(), "f", 5, 1.0, 0).unwrap();
        assert!(t.records.iter().all(|r| r.split == Split::Train));
        assert!(t.test().is_empty());
    }

    #[test]
    fn per_user_sampling_counts() {
        let text = "a x 1\na y 2\na z 3\na w 4\nb x 5\nb y 1\nc x 2\nc y 3\nc z 4\n";
        let t = ingest_ratings_text(text, "f", 1, 0.5, 3).unwrap();
        let mut per_user = vec![(0usize, 0usize); t.n_users()];
        for r in &t.records {
            per_user[r.user].1 += 1;
            if r.split == Split::Train {
                per_user[r.user].0 += 1;
            }
        }
        for (train, total) in per_user {
            assert_eq!(train, (0.5 * total as f64).round() as usize);
        }
        let again = ingest_ratings_text(text, "f", 1, 0.5, 3).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn filtering_is_idempotent() {
        let t = ingest_ratings_text(&fixture(), "f", 5, 0.6, 1).unwrap();
        assert_eq!(t.filter_items(5).unwrap(), t);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = ingest_ratings_text("1 2 3\n1 2\n", "r.txt", 1, 1.0, 0).unwrap_err();
        assert!(matches!(err, FgsrError::Parse { line: 2, .. }));
        assert!(err.to_string().starts_with("r.txt:2:"));
        let err = ingest_ratings_text("1 2 3\n4 5 x\n", "r.txt", 1, 1.0, 0).unwrap_err();
        assert!(matches!(err, FgsrError::Parse { line: 2, .. }));
        let err = ingest_ratings_text("1 2 3\n1 2 4\n", "r.txt", 1, 1.0, 0).unwrap_err();
        assert!(matches!(err, FgsrError::Parse { line: 2, .. }));
        // A header on the first line is skipped.
        let t = ingest_ratings_text("user,item,rating\n1,2,3\n", "r", 1, 1.0, 0).unwrap();
        assert_eq!(t.records.len(), 1);
    }

    #[test]
    fn empty_after_filtering_and_bad_fraction() {
        assert!(matches!(
            ingest_ratings_text("1 2 3\n", "f", 5, 1.0, 0),
            Err(FgsrError::EmptyRatings { min_ratings: 5 })
        ));
        assert!(ingest_ratings_text("1 2 3\n", "f", 1, 0.0, 0).is_err());
        assert!(ingest_ratings_text("1 2 3\n", "f", 1, 1.5, 0).is_err());
    }
}
