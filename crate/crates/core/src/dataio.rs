//! Score tables from CSV files, their conversion to partial-order elections,
//! and positional scoring rules.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::election::{Election, Preference};
use crate::error::{Error, Result};
use crate::mechanisms::argmax_first;

/// One `(voter, candidate, score)` entry; ids index [`ScoreTable::voters`]
/// and [`ScoreTable::candidates`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub voter: usize,
    pub candidate: usize,
    pub score: u64,
}

/// Scores given by voters to candidates. A score of zero, like a missing row,
/// means the candidate was not scored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub voters: Vec<String>,
    pub candidates: Vec<String>,
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(names: &mut Vec<String>, index: &mut HashMap<String, usize>, name: &str) -> usize {
        *index.entry(name.to_string()).or_insert_with(|| {
            names.push(name.to_string());
            names.len() - 1
        })
    }

    /// Builds a table from named entries, assigning ids by first appearance.
    pub fn from_entries<'a>(entries: impl IntoIterator<Item = (&'a str, &'a str, u64)>) -> Result<Self> {
        let mut b = TableBuilder::default();
        for (v, c, s) in entries {
            b.push(v, c, Some(s))?;
        }
        Ok(b.table)
    }
}

#[derive(Default)]
struct TableBuilder {
    table: ScoreTable,
    voter_index: HashMap<String, usize>,
    candidate_index: HashMap<String, usize>,
    seen: HashSet<(usize, usize)>,
}

impl TableBuilder {
    fn push(&mut self, voter: &str, candidate: &str, score: Option<u64>) -> Result<()> {
        let t = &mut self.table;
        let v = ScoreTable::intern(&mut t.voters, &mut self.voter_index, voter);
        let c = ScoreTable::intern(&mut t.candidates, &mut self.candidate_index, candidate);
        if !self.seen.insert((v, c)) {
            return Err(Error::DuplicateRow {
                voter: voter.into(),
                candidate: candidate.into(),
            });
        }
        if let Some(score) = score.filter(|&s| s > 0) {
            t.rows.push(ScoreRow {
                voter: v,
                candidate: c,
                score,
            });
        }
        Ok(())
    }
}

/// How the score column is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    /// Higher is better.
    Points,
    /// Finishing position, 1 is best; `\N` or an empty field means unranked.
    Rank,
}

/// Column mapping of a CSV layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub voter: String,
    pub candidate: String,
    pub score: String,
    pub kind: ScoreKind,
}

impl Schema {
    /// Jury and televote tables: `From country`, `To country`, `Points`.
    pub fn eurovision() -> Self {
        Self::points("From country", "To country", "Points")
    }

    /// Race results: `raceId`, `driverId`, `position`.
    pub fn f1() -> Self {
        Self {
            kind: ScoreKind::Rank,
            ..Self::points("raceId", "driverId", "position")
        }
    }

    pub fn points(voter: &str, candidate: &str, score: &str) -> Self {
        Self {
            voter: voter.into(),
            candidate: candidate.into(),
            score: score.into(),
            kind: ScoreKind::Points,
        }
    }
}

impl FromStr for Schema {
    type Err = Error;

    /// `eurovision`, `f1`, `generic:VOTER,CANDIDATE,SCORE` or
    /// `generic-rank:VOTER,CANDIDATE,POSITION`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eurovision" => return Ok(Self::eurovision()),
            "f1" => return Ok(Self::f1()),
            _ => {}
        }
        let (kind, cols) = if let Some(rest) = s.strip_prefix("generic:") {
            (ScoreKind::Points, rest)
        } else if let Some(rest) = s.strip_prefix("generic-rank:") {
            (ScoreKind::Rank, rest)
        } else {
            return Err(Error::InvalidParameter(format!("unknown schema `{s}`")));
        };
        match cols.split(',').map(str::trim).collect::<Vec<_>>()[..] {
            [v, c, sc] if !v.is_empty() && !c.is_empty() && !sc.is_empty() => Ok(Self {
                kind,
                ..Self::points(v, c, sc)
            }),
            _ => Err(Error::InvalidParameter(format!(
                "schema `{s}` needs three column names"
            ))),
        }
    }
}

/// Parses a `column=value` row filter.
pub fn parse_filter(s: &str) -> Result<(String, String)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| Error::InvalidParameter(format!("filter `{s}` is not of the form column=value")))
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, filters: &[(String, String)]) -> Result<ScoreTable> {
    read_csv(std::fs::File::open(path)?, schema, filters)
}

/// Reads rows matching every filter. Ids follow first appearance among the
/// kept rows. Ranks become scores `max_rank + 1 - rank`.
pub fn read_csv(input: impl Read, schema: &Schema, filters: &[(String, String)]) -> Result<ScoreTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (vc, cc, sc) = (
        column(&schema.voter)?,
        column(&schema.candidate)?,
        column(&schema.score)?,
    );
    let filters: Vec<(usize, &str)> = filters
        .iter()
        .map(|(k, v)| column(k).map(|i| (i, v.as_str())))
        .collect::<Result<_>>()?;

    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if !filters.iter().all(|&(i, v)| record.get(i) == Some(v)) {
            continue;
        }
        let raw = record.get(sc).unwrap_or("");
        let value = match (schema.kind, raw) {
            (ScoreKind::Rank, "" | "\\N") => None,
            (ScoreKind::Points, "") => None,
            _ => Some(raw.parse::<u64>().map_err(|_| Error::Csv {
                row,
                msg: format!(
                    "score `{raw}` in column `{}` is not a nonnegative integer",
                    schema.score
                ),
            })?),
        };
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        entries.push((field(vc), field(cc), value));
    }

    let max_rank = entries.iter().filter_map(|e| e.2).max().unwrap_or(0);
    let mut b = TableBuilder::default();
    for (v, c, value) in &entries {
        let score = match schema.kind {
            ScoreKind::Points => *value,
            ScoreKind::Rank => value.filter(|&r| r > 0).map(|r| max_rank + 1 - r),
        };
        b.push(v, c, score)?;
    }
    Ok(b.table)
}

/// Each voter ranks her scored candidates by score, above every unscored
/// candidate; unscored candidates stay incomparable.
pub fn scores_to_election(t: &ScoreTable) -> Result<Election> {
    let m = t.candidates.len();
    let mut by_voter: Vec<Vec<(u64, usize)>> = vec![Vec::new(); t.voters.len()];
    for r in &t.rows {
        if r.voter >= t.voters.len() {
            return Err(Error::VoterOutOfRange {
                voter: r.voter,
                n: t.voters.len(),
            });
        }
        if r.candidate >= m {
            return Err(Error::CandidateOutOfRange {
                candidate: r.candidate,
                m,
            });
        }
        if r.score > 0 {
            by_voter[r.voter].push((r.score, r.candidate));
        }
    }
    let voters = by_voter
        .into_iter()
        .enumerate()
        .map(|(v, mut scored)| {
            scored.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
            if scored.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::TiedScores {
                    voter: t.voters[v].clone(),
                });
            }
            let list: Vec<usize> = scored.iter().map(|&(_, c)| c).collect();
            Preference::from_top_list(m, &list)
        })
        .collect::<Result<_>>()?;
    Election::new(m, voters)
}

/// Points by rank position, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringRule {
    weights: Vec<u64>,
}

impl ScoringRule {
    pub fn new(weights: Vec<u64>) -> Result<Self> {
        if weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(format!(
                "weights must be nonincreasing, got {weights:?}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn eurovision() -> Self {
        Self {
            weights: vec![12, 10, 8, 7, 6, 5, 4, 3, 2, 1],
        }
    }

    pub fn f1() -> Self {
        Self {
            weights: vec![25, 18, 15, 12, 10, 8, 6, 4, 2, 1],
        }
    }

    pub fn plurality() -> Self {
        Self { weights: vec![1] }
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }
}

impl FromStr for ScoringRule {
    type Err = Error;

    /// `eurovision`, `f1`, `plurality`, or comma-separated weights.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eurovision" => Ok(Self::eurovision()),
            "f1" => Ok(Self::f1()),
            "plurality" => Ok(Self::plurality()),
            _ => {
                let weights = s
                    .split(',')
                    .map(|w| w.trim().parse::<u64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::InvalidParameter(format!("unknown scoring rule `{s}`")))?;
                Self::new(weights)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionalOutcome {
    pub totals: Vec<u64>,
    pub winner: usize,
}

/// Sum over voters of the weight at each candidate's position in the
/// voter's ranked prefix. Highest total wins, lowest index among equals.
pub fn positional_score(e: &Election, rule: &ScoringRule) -> PositionalOutcome {
    let mut totals = vec![0; e.m()];
    for p in e.voters() {
        for (pos, c) in p.ranked_prefix().into_iter().enumerate() {
            totals[c] += rule.weights.get(pos).copied().unwrap_or(0);
        }
    }
    let winner = argmax_first(&totals).unwrap_or(0);
    PositionalOutcome { totals, winner }
}

/// Candidate names in id order, keyed for lookups by name.
pub fn candidate_ids(t: &ScoreTable) -> BTreeMap<&str, usize> {
    t.candidates.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::scores;

    #[test]
    fn two_scores_expand_to_three_pairs() {
        let mut t = ScoreTable::from_entries([("v", "a", 12), ("v", "b", 10)]).unwrap();
        t.candidates.push("c".into());
        let e = scores_to_election(&t).unwrap();
        let pairs: Vec<_> = e.voter(0).pairs().collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn silent_voter_is_empty() {
        let t = ScoreTable::from_entries([("v", "a", 3), ("w", "a", 0), ("w", "b", 0)]).unwrap();
        let e = scores_to_election(&t).unwrap();
        assert!(e.voter(1).is_empty());
        assert_eq!(e.voter(0).pairs().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn ties_and_duplicates_rejected() {
        let t = ScoreTable::from_entries([("v", "a", 3), ("v", "b", 3)]).unwrap();
        assert!(matches!(scores_to_election(&t), Err(Error::TiedScores { voter }) if voter == "v"));
        assert!(matches!(
            ScoreTable::from_entries([("v", "a", 3), ("v", "a", 2)]),
            Err(Error::DuplicateRow { .. })
        ));
    }

    #[test]
    fn ranks_with_retirements() {
        let csv = "raceId,driverId,position\n1,h,1\n1,v,2\n1,l,\\N\n1,r,\\N\n";
        let t = read_csv(csv.as_bytes(), &Schema::f1(), &[]).unwrap();
        let e = scores_to_election(&t).unwrap();
        let p = e.voter(0);
        assert!(p.prefers(0, 1) && p.prefers(1, 2) && p.prefers(1, 3));
        assert!(!p.compares(2, 3));
    }

    #[test]
    fn bad_score_names_row() {
        let csv = "v,c,s\nx,a,1\nx,b,abc\n";
        let err = read_csv(csv.as_bytes(), &"generic:v,c,s".parse().unwrap(), &[]).unwrap_err();
        assert!(matches!(err, Error::Csv { row: 3, .. }), "{err}");
        let err = read_csv(csv.as_bytes(), &"generic:v,c,points".parse().unwrap(), &[]).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "points"));
    }

    #[test]
    fn filters_select_rows() {
        let csv = "Year,From country,To country,Points\n2004,A,B,12\n2005,A,C,12\n2004,C,B,10\n";
        let f = vec![parse_filter("Year=2004").unwrap()];
        let t = read_csv(csv.as_bytes(), &Schema::eurovision(), &f).unwrap();
        assert_eq!((t.voters.len(), t.candidates.len(), t.rows.len()), (2, 1, 2));
    }

    #[test]
    fn eurovision_single_voter() {
        let e = Election::from_rankings(3, &[vec![2, 0, 1]]).unwrap();
        let r = positional_score(&e, &ScoringRule::eurovision());
        assert_eq!(r.totals, vec![10, 8, 12]);
        assert_eq!(r.winner, 2);
        let zero = positional_score(&e, &ScoringRule::new(vec![0, 0, 0]).unwrap());
        assert_eq!(zero.totals, vec![0, 0, 0]);
    }

    #[test]
    fn plurality_weights_match_counts() {
        let e = Election::from_rankings(3, &[vec![2, 0, 1], vec![0, 2, 1], vec![2, 1, 0]]).unwrap();
        let r = positional_score(&e, &ScoringRule::plurality());
        let counts: Vec<u64> = scores(&e).plurality.iter().map(|&c| c as u64).collect();
        assert_eq!(r.totals, counts);
    }

    #[test]
    fn schema_parsing() {
        assert_eq!("eurovision".parse::<Schema>().unwrap(), Schema::eurovision());
        assert!("generic:a,b".parse::<Schema>().is_err());
        assert!("1,2,3".parse::<ScoringRule>().is_err());
    }
}
