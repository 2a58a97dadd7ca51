//! Line-based election format.
//!
//! ```text
//! # comments start with '#'
//! 3 4
//! 2 > 0 > 1 > 3
//! 1 = 3 > 0
//!
//! ```
//!
//! The header gives `n m`; each of the next `n` lines holds one voter. Ranked
//! groups are separated by `>`, candidates tied inside a group by `=`, and
//! omitted candidates rank below every listed one. An empty line is a voter
//! who reports nothing.

use std::fmt::Write as _;

use super::{Election, Preference};
use crate::error::{Error, Result};

pub fn parse_election(text: &str) -> Result<Election> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.starts_with('#'));

    let (hline, header) = lines.by_ref().find(|(_, l)| !l.is_empty()).ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    let nums: Vec<&str> = header.split_whitespace().collect();
    let parse_num = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::Parse {
            line: hline,
            msg: format!("expected a count, found `{s}`"),
        })
    };
    let [n, m] = nums[..] else {
        return Err(Error::Parse {
            line: hline,
            msg: "header must be `n m`".into(),
        });
    };
    let (n, m) = (parse_num(n)?, parse_num(m)?);

    let mut voters = Vec::with_capacity(n);
    for _ in 0..n {
        let (lineno, line) = lines.next().ok_or(Error::Parse {
            line: hline,
            msg: format!("expected {n} voter lines, found {}", voters.len()),
        })?;
        voters.push(parse_voter(line, m).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::Parse { line: lineno, msg },
            other => Error::Parse {
                line: lineno,
                msg: other.to_string(),
            },
        })?);
    }
    if let Some((lineno, _)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("more than {n} voter lines"),
        });
    }
    Election::new(m, voters)
}

fn parse_voter(line: &str, m: usize) -> Result<Preference> {
    if line.is_empty() {
        return Ok(Preference::empty(m));
    }
    let groups = line
        .split('>')
        .map(|g| {
            g.split('=')
                .map(|c| {
                    let c = c.trim();
                    c.parse::<usize>().map_err(|_| Error::Parse {
                        line: 0,
                        msg: format!("expected a candidate id, found `{c}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Preference::from_groups(m, &groups)
}

/// Inverse of [`parse_election`]. Fails for voters whose relation is neither
/// a top list nor a weak order.
pub fn write_election(e: &Election) -> Result<String> {
    let mut out = format!("{} {}\n", e.n(), e.m());
    for (i, p) in e.voters().iter().enumerate() {
        let groups: Vec<Vec<usize>> = match p.top_list() {
            Some(list) => list.iter().map(|&c| vec![c]).collect(),
            None => {
                let layers = p.weak_order_layers().ok_or(Error::NotExpressible { voter: i })?;
                if layers.len() == 1 {
                    Vec::new()
                } else {
                    layers
                }
            }
        };
        let line = groups
            .iter()
            .map(|g| g.iter().map(usize::to_string).collect::<Vec<_>>().join(" = "))
            .collect::<Vec<_>>()
            .join(" > ");
        writeln!(out, "{line}").expect("writing to a String");
    }
    Ok(out)
}
