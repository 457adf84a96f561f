use std::collections::HashMap;

const ALPHA_WEIGHT: f64 = 9.0;
const PENALTY_GAMMA: f64 = 0.5;
const NODE_BUDGET: usize = 200_000;

/// Exact-match METEOR: F = 10PR / (R + 9P), scaled by
/// `1 - 0.5 (chunks / matches)^3`.
pub fn meteor(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let (matches, chunks) = meteor_alignment(candidate, reference);
    if matches == 0 {
        return 0.0;
    }
    let m = matches as f64;
    let p = m / candidate.len() as f64;
    let r = m / reference.len() as f64;
    let f = (1.0 + ALPHA_WEIGHT) * p * r / (r + ALPHA_WEIGHT * p);
    let frag = chunks as f64 / m;
    f * (1.0 - PENALTY_GAMMA * frag * frag * frag)
}

/// `(matches, chunks)` of an alignment with the most exact matches and,
/// among those, the fewest chunks.
///
/// The match count is fixed by word multiplicities; the chunk count is
/// minimized by depth-first search over candidate positions, seeded with
/// a greedy alignment and pruned on the running chunk count. Searches that
/// exceed a node budget keep the best alignment found so far.
pub fn meteor_alignment(candidate: &[String], reference: &[String]) -> (usize, usize) {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let r: Vec<usize> = reference
        .iter()
        .map(|w| {
            let n = ids.len();
            *ids.entry(w.as_str()).or_insert(n)
        })
        .collect();
    let c: Vec<Option<usize>> = candidate.iter().map(|w| ids.get(w.as_str()).copied()).collect();

    let mut ref_count = vec![0usize; ids.len()];
    r.iter().for_each(|&w| ref_count[w] += 1);
    let mut cand_count = vec![0usize; ids.len()];
    c.iter().flatten().for_each(|&w| cand_count[w] += 1);
    let mut need: Vec<usize> = (0..ids.len()).map(|w| ref_count[w].min(cand_count[w])).collect();
    let matches: usize = need.iter().sum();
    if matches == 0 {
        return (0, 0);
    }
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for (j, &w) in r.iter().enumerate() {
        positions[w].push(j);
    }

    let mut search = Search {
        c: &c,
        positions: &positions,
        used: vec![false; r.len()],
        remaining: cand_count,
        best: greedy_chunks(&c, &positions, r.len(), need.clone()),
        nodes: 0,
    };
    search.dfs(0, None, 0, &mut need);
    (matches, search.best)
}

fn greedy_chunks(c: &[Option<usize>], positions: &[Vec<usize>], r_len: usize, mut need: Vec<usize>) -> usize {
    let mut used = vec![false; r_len];
    let mut prev: Option<usize> = None;
    let mut chunks = 0;
    for &w in c {
        let Some(w) = w.filter(|&w| need[w] > 0) else {
            prev = None;
            continue;
        };
        let next = prev.map(|p| p + 1);
        let j = positions[w]
            .iter()
            .copied()
            .find(|&j| !used[j] && Some(j) == next)
            .or_else(|| positions[w].iter().copied().find(|&j| !used[j]))
            .expect("need implies a free reference position");
        if next != Some(j) {
            chunks += 1;
        }
        used[j] = true;
        need[w] -= 1;
        prev = Some(j);
    }
    chunks
}

struct Search<'a> {
    c: &'a [Option<usize>],
    positions: &'a [Vec<usize>],
    used: Vec<bool>,
    /// Candidate occurrences of each word at or after the current position.
    remaining: Vec<usize>,
    best: usize,
    nodes: usize,
}

impl Search<'_> {
    fn dfs(&mut self, i: usize, prev: Option<usize>, chunks: usize, need: &mut [usize]) {
        self.nodes += 1;
        if chunks >= self.best || self.nodes > NODE_BUDGET {
            return;
        }
        if i == self.c.len() {
            if need.iter().all(|&n| n == 0) {
                self.best = chunks;
            }
            return;
        }
        let Some(w) = self.c[i] else {
            self.dfs(i + 1, None, chunks, need);
            return;
        };
        self.remaining[w] -= 1;
        if need[w] > 0 {
            // extending the current chunk first tends to find good bounds early
            let mut order: Vec<usize> = self.positions[w].iter().copied().filter(|&j| !self.used[j]).collect();
            if let Some(p) = prev {
                order.sort_by_key(|&j| j != p + 1);
            }
            for j in order {
                let extra = usize::from(prev.map(|p| p + 1) != Some(j));
                self.used[j] = true;
                need[w] -= 1;
                self.dfs(i + 1, Some(j), chunks + extra, need);
                need[w] += 1;
                self.used[j] = false;
            }
        }
        if self.remaining[w] >= need[w] {
            self.dfs(i + 1, None, chunks, need);
        }
        self.remaining[w] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    /// Enumerates every assignment of candidate positions to distinct
    /// reference positions with equal words.
    fn brute(c: &[String], r: &[String]) -> (usize, usize) {
        fn go(c: &[String], r: &[String], i: usize, used: &mut Vec<bool>, align: &mut Vec<Option<usize>>, best: &mut (usize, usize)) {
            if i == c.len() {
                let m = align.iter().flatten().count();
                let mut chunks = 0;
                let mut prev: Option<usize> = None;
                for a in align.iter() {
                    match a {
                        Some(j) => {
                            if prev.map(|p| p + 1) != Some(*j) {
                                chunks += 1;
                            }
                            prev = Some(*j);
                        }
                        None => prev = None,
                    }
                }
                if m > best.0 || (m == best.0 && chunks < best.1) {
                    *best = (m, chunks);
                }
                return;
            }
            align.push(None);
            go(c, r, i + 1, used, align, best);
            align.pop();
            for j in 0..r.len() {
                if !used[j] && r[j] == c[i] {
                    used[j] = true;
                    align.push(Some(j));
                    go(c, r, i + 1, used, align, best);
                    align.pop();
                    used[j] = false;
                }
            }
        }
        let mut best = (0, 0);
        go(c, r, 0, &mut vec![false; r.len()], &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn identical_four_words() {
        assert_eq!(meteor(&w("what is the number"), &w("what is the number")), 0.9921875);
    }

    #[test]
    fn reversed_pair_is_half() {
        assert_eq!(meteor_alignment(&w("a b"), &w("b a")), (2, 2));
        assert_eq!(meteor(&w("a b"), &w("b a")), 0.5);
    }

    #[test]
    fn zero_overlap_and_empty() {
        assert_eq!(meteor(&w("a b"), &w("c d")), 0.0);
        assert_eq!(meteor(&[], &w("c d")), 0.0);
    }

    #[test]
    fn prefers_fewer_chunks_among_maximal_alignments() {
        // greedy left-to-right would pair the first "the" with the first
        // reference "the" and produce 3 chunks
        assert_eq!(meteor_alignment(&w("the cat the dog"), &w("the dog x the cat")), (4, 2));
    }

    proptest! {
        #[test]
        fn alignment_matches_brute_force(
            c in proptest::collection::vec(0u8..3, 0..7),
            r in proptest::collection::vec(0u8..3, 0..7),
        ) {
            let c: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            let r: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            prop_assert_eq!(meteor_alignment(&c, &r), brute(&c, &r));
        }
    }
}
