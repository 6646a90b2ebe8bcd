//! Citation corpus parsing and cleaning.
//!
//! Input is a pair of CSV files: `id,date` for articles and
//! `citing_id,cited_id` for citations. Cleaning runs in a fixed order so the
//! removal counts are reproducible:
//!
//! 1. articles outside the date window are dropped;
//! 2. citations whose cited article is unknown or was dropped, or whose citing
//!    article was dropped, are counted as dangling;
//! 3. repeated `(citing, cited)` pairs are counted as duplicates;
//! 4. remaining self-citations are counted and removed.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::Config(format!(
                "date window start {start} is after end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationRecord {
    pub article_id: String,
    pub timestamp: NaiveDate,
    /// Cited article ids, in first-occurrence order of the input.
    pub references: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_articles: u64,
    pub n_citations: u64,
    pub n_duplicates_removed: u64,
    pub n_self_citations_removed: u64,
    pub n_dangling_removed: u64,
    pub mean_citations: f64,
}

impl CorpusStats {
    /// Number of raw edge rows these stats account for.
    pub fn raw_edges(&self) -> u64 {
        self.n_citations
            + self.n_duplicates_removed
            + self.n_self_citations_removed
            + self.n_dangling_removed
    }
}

fn mean(n_citations: u64, n_articles: u64) -> f64 {
    if n_articles == 0 {
        0.0
    } else {
        n_citations as f64 / n_articles as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CitationCorpus {
    /// Sorted by `(timestamp, article_id)`.
    pub records: Vec<CitationRecord>,
    pub stats: CorpusStats,
}

fn parse_date(raw: &str, line: u64) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(raw.trim(), DATE_FORMAT)
        .map_err(|e| Error::parse(line, format!("invalid date {raw:?}: {e}")))
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input)
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, expected: [&str; 2]) -> Result<()> {
    let header = reader
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?;
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::parse(
            1,
            format!("expected header {:?}, found {:?}", expected.join(","), found.join(",")),
        ));
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::parse(line, e.to_string())
}

/// Parses and cleans a corpus. See the module docs for the cleaning order.
pub fn parse_corpus<N: Read, E: Read>(
    nodes: N,
    edges: E,
    window: Option<DateWindow>,
) -> Result<CitationCorpus> {
    let mut reader = csv_reader(nodes);
    check_header(&mut reader, ["id", "date"])?;

    // Every article in the file, windowed or not; `None` marks dropped ones.
    let mut index: HashMap<String, Option<usize>> = HashMap::new();
    let mut records: Vec<CitationRecord> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let id = row[0].trim();
        if id.is_empty() {
            return Err(Error::parse(line, "empty article id"));
        }
        let date = parse_date(&row[1], line)?;
        let keep = window.is_none_or(|w| w.contains(date));
        let slot = keep.then_some(records.len());
        if index.insert(id.to_owned(), slot).is_some() {
            return Err(Error::parse(line, format!("duplicate article id {id:?}")));
        }
        if keep {
            records.push(CitationRecord {
                article_id: id.to_owned(),
                timestamp: date,
                references: Vec::new(),
            });
        }
    }

    let mut stats = CorpusStats::default();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut reader = csv_reader(edges);
    check_header(&mut reader, ["citing_id", "cited_id"])?;
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let citing = row[0].trim();
        let cited = row[1].trim();
        let citing_slot = match index.get(citing) {
            Some(slot) => *slot,
            None => {
                return Err(Error::parse(
                    line,
                    format!("citation from unknown article {citing:?}"),
                ))
            }
        };
        let cited_slot = index.get(cited).copied().flatten();
        let (Some(src), Some(dst)) = (citing_slot, cited_slot) else {
            stats.n_dangling_removed += 1;
            continue;
        };
        if !seen.insert((src, dst)) {
            stats.n_duplicates_removed += 1;
            continue;
        }
        if src == dst {
            stats.n_self_citations_removed += 1;
            continue;
        }
        let target = records[dst].article_id.clone();
        records[src].references.push(target);
        stats.n_citations += 1;
    }

    records.sort_by(|a, b| {
        (a.timestamp, a.article_id.as_str()).cmp(&(b.timestamp, b.article_id.as_str()))
    });
    stats.n_articles = records.len() as u64;
    stats.mean_citations = mean(stats.n_citations, stats.n_articles);
    Ok(CitationCorpus { records, stats })
}

/// Stats for a corpus, with the article and citation counts recomputed from
/// the records. Removal counts are carried over since they cannot be
/// recovered from cleaned records.
pub fn corpus_summary(corpus: &CitationCorpus) -> CorpusStats {
    let n_articles = corpus.records.len() as u64;
    let n_citations = corpus
        .records
        .iter()
        .map(|r| r.references.len() as u64)
        .sum();
    CorpusStats {
        n_articles,
        n_citations,
        mean_citations: mean(n_citations, n_articles),
        ..corpus.stats
    }
}

impl CitationCorpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Position of every article id in `records`.
    pub fn position_index(&self) -> HashMap<&str, usize> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.article_id.as_str(), i))
            .collect()
    }

    /// Writes the cleaned nodes file in canonical (sorted) order.
    pub fn write_nodes<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "date"]).map_err(csv_io)?;
        for r in &self.records {
            let date = r.timestamp.format(DATE_FORMAT).to_string();
            w.write_record([r.article_id.as_str(), date.as_str()])
                .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the cleaned edges file, grouped by citing article in record order.
    pub fn write_edges<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["citing_id", "cited_id"]).map_err(csv_io)?;
        for r in &self.records {
            for cited in &r.references {
                w.write_record([r.article_id.as_str(), cited.as_str()])
                    .map_err(csv_io)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn stats_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.stats)?)
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, DATE_FORMAT).unwrap()
    }

    fn parse(nodes: &str, edges: &str) -> Result<CitationCorpus> {
        parse_corpus(nodes.as_bytes(), edges.as_bytes(), None)
    }

    #[test]
    fn empty_edges_file() {
        let c = parse("id,date\na,2000-01-01\nb,2000-01-02\nc,2000-01-03\n", "citing_id,cited_id\n").unwrap();
        assert_eq!(c.stats.n_articles, 3);
        assert_eq!(c.stats.n_citations, 0);
        assert_eq!(c.stats.mean_citations, 0.0);
    }

    #[test]
    fn duplicate_and_self_citations() {
        let c = parse(
            "id,date\nA,2000-01-01\nB,1999-01-01\n",
            "citing_id,cited_id\nA,A\nA,B\nA,B\n",
        )
        .unwrap();
        assert_eq!(c.stats.n_citations, 1);
        assert_eq!(c.stats.n_duplicates_removed, 1);
        assert_eq!(c.stats.n_self_citations_removed, 1);
        assert_eq!(c.records[0].article_id, "B");
        assert_eq!(c.records[1].references, vec!["B".to_string()]);
    }

    #[test]
    fn repeated_self_citation_counts_duplicate_first() {
        let c = parse("id,date\nA,2000-01-01\n", "citing_id,cited_id\nA,A\nA,A\n").unwrap();
        assert_eq!(c.stats.n_duplicates_removed, 1);
        assert_eq!(c.stats.n_self_citations_removed, 1);
        assert_eq!(c.stats.n_citations, 0);
    }

    #[test]
    fn summary_examples() {
        let single = parse("id,date\nA,2000-01-01\n", "citing_id,cited_id\n").unwrap();
        let s = corpus_summary(&single);
        assert_eq!((s.n_articles, s.mean_citations), (1, 0.0));

        let pair = parse("id,date\nA,2000-01-01\nB,2000-02-01\n", "citing_id,cited_id\nB,A\n").unwrap();
        let s = corpus_summary(&pair);
        assert_eq!(s.mean_citations, 0.5);
        assert_eq!(s, pair.stats);
    }

    #[test]
    fn window_drops_articles_and_counts_dangling() {
        let nodes = "id,date\nA,1990-01-01\nB,2000-01-01\nC,2010-01-01\n";
        let edges = "citing_id,cited_id\nB,A\nC,B\nB,Z\n";
        let w = DateWindow::new(d("1995-01-01"), d("2005-12-31")).unwrap();
        let c = parse_corpus(nodes.as_bytes(), edges.as_bytes(), Some(w)).unwrap();
        assert_eq!(c.stats.n_articles, 1);
        assert_eq!(c.stats.n_citations, 0);
        assert_eq!(c.stats.n_dangling_removed, 3);
        assert_eq!(c.stats.raw_edges(), 3);
    }

    #[test]
    fn ties_sort_lexicographically() {
        let c = parse("id,date\nb,2000-01-01\na,2000-01-01\nc,1999-12-31\n", "citing_id,cited_id\n").unwrap();
        let ids: Vec<_> = c.records.iter().map(|r| r.article_id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse("id,date\nA,2000-01-01\nB,2000-13-01\n", "citing_id,cited_id\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse("id,date\nA,2000-01-01\n", "citing_id,cited_id\nA,A\nQ,A\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse("id,date\nA,2000-01-01,x\n", "citing_id,cited_id\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("name,date\n", "citing_id,cited_id\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn inverted_window_is_rejected() {
        assert!(DateWindow::new(d("2001-01-01"), d("2000-01-01")).is_err());
    }
}
