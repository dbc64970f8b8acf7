//! Directed hyperlink-graph model.
//!
//! Pages are indexed `0..n`. Only out-links are stored: the algorithms in
//! this crate never need in-link lists. A graph implicitly defines the
//! column-stochastic hyperlink matrix `A` with `A[i][j] = 1 / N_j` when
//! page `j` links to page `i`, where `N_j` is the out-degree of `j`.
//! Every page must have at least one out-link.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("page {0} has no out-links")]
    DanglingPage(usize),
    #[error("page index {index} is out of range for {n} pages")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: usize, to: usize },
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
}

/// Out-link adjacency of `n` pages. Immutable after construction, so it can
/// be shared freely across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperlinkGraph {
    /// `out[k]` is the sorted, duplicate-free list of pages that page `k`
    /// links to. Never empty.
    out: Vec<Vec<usize>>,
}

impl HyperlinkGraph {
    /// Builds a graph from per-page out-link lists, validating all
    /// invariants. Lists may arrive unsorted.
    pub fn new(mut out_links: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let n = out_links.len();
        for (k, targets) in out_links.iter_mut().enumerate() {
            if targets.is_empty() {
                return Err(GraphError::DanglingPage(k));
            }
            targets.sort_unstable();
            for w in targets.windows(2) {
                if w[0] == w[1] {
                    return Err(GraphError::DuplicateEdge { from: k, to: w[0] });
                }
            }
            let last = *targets.last().unwrap();
            if last >= n {
                return Err(GraphError::IndexOutOfRange { index: last, n });
            }
        }
        Ok(Self { out: out_links })
    }

    /// Number of pages `N`.
    pub fn page_count(&self) -> usize {
        self.out.len()
    }

    /// Sorted out-link targets of page `k`.
    pub fn out_links(&self, k: usize) -> &[usize] {
        &self.out[k]
    }

    /// Out-degree `N_k`. Always at least 1.
    pub fn out_degree(&self, k: usize) -> usize {
        self.out[k].len()
    }

    pub fn has_self_loop(&self, k: usize) -> bool {
        self.out[k].binary_search(&k).is_ok()
    }

    /// The diagonal entry `A[k][k]`: `1 / N_k` if `k` links to itself,
    /// 0 otherwise.
    pub fn self_loop_weight(&self, k: usize) -> f64 {
        if self.has_self_loop(k) {
            1.0 / self.out_degree(k) as f64
        } else {
            0.0
        }
    }

    /// Parses the text format: first non-comment line is the page count,
    /// then one `u v` edge per line. Lines starting with `#` are comments;
    /// blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut n: Option<usize> = None;
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            match n {
                None => {
                    let count: usize = content.parse().map_err(|_| GraphError::MalformedLine {
                        line,
                        reason: format!("expected page count, got {content:?}"),
                    })?;
                    if count == 0 {
                        return Err(GraphError::MalformedLine {
                            line,
                            reason: "page count must be positive".to_string(),
                        });
                    }
                    n = Some(count);
                    out = vec![Vec::new(); count];
                }
                Some(count) => {
                    let mut fields = content.split_whitespace();
                    let (u, v) = match (fields.next(), fields.next(), fields.next()) {
                        (Some(u), Some(v), None) => (u, v),
                        _ => {
                            return Err(GraphError::MalformedLine {
                                line,
                                reason: format!("expected \"u v\", got {content:?}"),
                            })
                        }
                    };
                    let parse = |s: &str| -> Result<usize, GraphError> {
                        s.parse().map_err(|_| GraphError::MalformedLine {
                            line,
                            reason: format!("invalid page index {s:?}"),
                        })
                    };
                    let (u, v) = (parse(u)?, parse(v)?);
                    for idx in [u, v] {
                        if idx >= count {
                            return Err(GraphError::IndexOutOfRange {
                                index: idx,
                                n: count,
                            });
                        }
                    }
                    match out[u].binary_search(&v) {
                        Ok(_) => return Err(GraphError::DuplicateEdge { from: u, to: v }),
                        Err(pos) => out[u].insert(pos, v),
                    }
                }
            }
        }
        if n.is_none() {
            return Err(GraphError::MalformedLine {
                line: 0,
                reason: "empty input".to_string(),
            });
        }
        if let Some(k) = out.iter().position(Vec::is_empty) {
            return Err(GraphError::DanglingPage(k));
        }
        Ok(Self { out })
    }

    /// Serializes to the text format accepted by [`HyperlinkGraph::parse`].
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.page_count());
        for (u, targets) in self.out.iter().enumerate() {
            for &v in targets {
                s.push_str(&format!("{u} {v}\n"));
            }
        }
        s
    }

    /// Random graph in the style of the experiments: for each ordered pair
    /// `(i, j)` (self-pairs included) a uniform draw in `[0, 1)` decides the
    /// edge `j -> i`, which exists iff the draw is at least `threshold`.
    /// Any page left without out-links is patched with one uniformly random
    /// target re-drawn from the same seeded stream, so the result is always
    /// a valid graph. Deterministic for a fixed seed.
    pub fn synthetic(n: usize, threshold: f64, seed: u64) -> Self {
        assert!(n >= 1, "need at least one page");
        assert!(
            (0.0..=1.0).contains(&threshold),
            "threshold must lie in [0, 1]"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for targets in out.iter_mut() {
                if rng.random::<f64>() >= threshold {
                    // Row-major draws mean each out-list receives its
                    // targets in increasing order, so it stays sorted.
                    targets.push(i);
                }
            }
        }
        for targets in out.iter_mut() {
            if targets.is_empty() {
                targets.push(rng.random_range(0..n));
            }
        }
        Self { out }
    }

    /// True iff every page reaches every other page along directed links.
    /// Standard two-pass reachability from page 0 (forward, then along
    /// reversed edges).
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.page_count();
        if !self.reaches_all_forward() {
            return false;
        }
        // Reverse adjacency is built transiently; it is not part of the
        // graph representation.
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, targets) in self.out.iter().enumerate() {
            for &v in targets {
                rev[v].push(u);
            }
        }
        reaches_all(n, |k| &rev[k])
    }

    fn reaches_all_forward(&self) -> bool {
        reaches_all(self.page_count(), |k| &self.out[k])
    }
}

fn reaches_all<'a, F: Fn(usize) -> &'a [usize] + 'a>(n: usize, neighbors: F) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}
