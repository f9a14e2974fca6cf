//! Line-by-line comparison of two concordances of the same text.
//!
//! Lines from both sides are linked when their spans intersect. Each
//! connected group is classified as a whole: a single line is unique to its
//! side; a one-to-one pair with equal spans is common (same output) or an
//! output conflict (different output); anything else is a partial overlap.

mod html;
mod relation;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concordance::{Concordance, ConcordanceLine};

pub use html::render_html;
pub use relation::{infer_relation, recommend, Action, DiffCounts, Relation, RelationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiffError {
    #[error("concordances come from different texts (`{x}` vs `{y}`)")]
    TextMismatch { x: String, y: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    X,
    Y,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::X => Side::Y,
            Side::Y => Side::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiffClass {
    Common,
    PartialOverlap,
    UniqueX,
    UniqueY,
    OutputConflict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffLine {
    pub side: Side,
    /// Position of the line in its own concordance.
    pub index: usize,
    pub line: ConcordanceLine,
    pub class: DiffClass,
    /// Index of the related line in the other concordance.
    pub partner_index: Option<usize>,
}

fn check_same_text(cx: &Concordance, cy: &Concordance) -> Result<(), DiffError> {
    if cx.source_text_id != cy.source_text_id {
        return Err(DiffError::TextMismatch {
            x: cx.source_text_id.clone(),
            y: cy.source_text_id.clone(),
        });
    }
    Ok(())
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = i;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Cross-side pairs `(x index, y index)` whose spans intersect, found with
/// a sweep over start offsets.
fn overlapping_pairs(xs: &[ConcordanceLine], ys: &[ConcordanceLine]) -> Vec<(usize, usize)> {
    let mut events: Vec<(usize, Side, usize)> = xs
        .iter()
        .enumerate()
        .map(|(i, l)| (l.start, Side::X, i))
        .chain(ys.iter().enumerate().map(|(i, l)| (l.start, Side::Y, i)))
        .collect();
    events.sort();
    let mut active_x: Vec<usize> = Vec::new();
    let mut active_y: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    for (start, side, i) in events {
        active_x.retain(|&j| xs[j].end > start);
        active_y.retain(|&j| ys[j].end > start);
        match side {
            Side::X => {
                pairs.extend(active_y.iter().map(|&j| (i, j)));
                active_x.push(i);
            }
            Side::Y => {
                pairs.extend(active_x.iter().map(|&j| (j, i)));
                active_y.push(i);
            }
        }
    }
    pairs.sort();
    pairs
}

/// An intersecting line with a different span if there is one, else any.
fn partial_partner(
    line: &ConcordanceLine,
    partners: &[usize],
    others: &[ConcordanceLine],
) -> Option<usize> {
    partners
        .iter()
        .copied()
        .find(|&p| !line.same_span(&others[p]))
        .or_else(|| partners.first().copied())
}

/// Classifies every line of both concordances.
pub fn align(cx: &Concordance, cy: &Concordance) -> Result<Vec<DiffLine>, DiffError> {
    check_same_text(cx, cy)?;
    let (xs, ys) = (&cx.lines, &cy.lines);
    let n = xs.len();
    let pairs = overlapping_pairs(xs, ys);

    let mut uf = UnionFind((0..n + ys.len()).collect());
    let mut partners_x: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut partners_y: Vec<Vec<usize>> = vec![Vec::new(); ys.len()];
    for &(i, j) in &pairs {
        uf.union(i, n + j);
        partners_x[i].push(j);
        partners_y[j].push(i);
    }

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n + ys.len()];
    for node in 0..n + ys.len() {
        let root = uf.find(node);
        groups[root].push(node);
    }

    let mut out_groups: Vec<Vec<DiffLine>> = Vec::new();
    for members in groups.into_iter().filter(|g| !g.is_empty()) {
        let x_members: Vec<usize> = members.iter().copied().filter(|&m| m < n).collect();
        let y_members: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&m| m >= n)
            .map(|m| m - n)
            .collect();
        let mut lines = Vec::with_capacity(members.len());
        match (x_members.as_slice(), y_members.as_slice()) {
            ([i], []) => lines.push(DiffLine {
                side: Side::X,
                index: *i,
                line: xs[*i].clone(),
                class: DiffClass::UniqueX,
                partner_index: None,
            }),
            ([], [j]) => lines.push(DiffLine {
                side: Side::Y,
                index: *j,
                line: ys[*j].clone(),
                class: DiffClass::UniqueY,
                partner_index: None,
            }),
            ([i], [j]) => {
                let (lx, ly) = (&xs[*i], &ys[*j]);
                let class = if !lx.same_span(ly) {
                    DiffClass::PartialOverlap
                } else if lx.matched == ly.matched {
                    DiffClass::Common
                } else {
                    DiffClass::OutputConflict
                };
                lines.push(DiffLine {
                    side: Side::X,
                    index: *i,
                    line: lx.clone(),
                    class,
                    partner_index: Some(*j),
                });
                lines.push(DiffLine {
                    side: Side::Y,
                    index: *j,
                    line: ly.clone(),
                    class,
                    partner_index: Some(*i),
                });
            }
            _ => {
                for &i in &x_members {
                    lines.push(DiffLine {
                        side: Side::X,
                        index: i,
                        line: xs[i].clone(),
                        class: DiffClass::PartialOverlap,
                        partner_index: partial_partner(&xs[i], &partners_x[i], ys),
                    });
                }
                for &j in &y_members {
                    lines.push(DiffLine {
                        side: Side::Y,
                        index: j,
                        line: ys[j].clone(),
                        class: DiffClass::PartialOverlap,
                        partner_index: partial_partner(&ys[j], &partners_y[j], xs),
                    });
                }
            }
        }
        out_groups.push(lines);
    }

    let group_key = |g: &Vec<DiffLine>| {
        g.iter()
            .map(|d| (d.line.start, d.line.end, d.side, d.index))
            .min()
            .expect("non-empty group")
    };
    out_groups.sort_by_key(group_key);
    Ok(out_groups.into_iter().flatten().collect())
}
