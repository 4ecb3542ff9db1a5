/// Lowercases, removes punctuation and collapses whitespace.
pub fn normalize(s: &str) -> String {
    let kept: String = s
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    kept.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Longest common run of `a[alo..ahi]` and `b[blo..bhi]` as `(i, j, size)`.
/// Among runs of equal length the one starting earliest in `a`, then in
/// `b`, wins.
fn longest_match(
    a: &[char],
    b: &[char],
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
) -> (usize, usize, usize) {
    let mut best = (alo, blo, 0);
    // prev[j] is the length of the common run ending at a[i-1], b[j-1].
    let width = bhi - blo + 1;
    let mut prev = vec![0usize; width];
    let mut cur = vec![0usize; width];
    for i in alo..ahi {
        for j in blo..bhi {
            let k = j - blo + 1;
            cur[k] = if a[i] == b[j] { prev[k - 1] + 1 } else { 0 };
            let size = cur[k];
            if size > best.2 {
                best = (i + 1 - size, j + 1 - size, size);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Matching blocks `(i, j, size)` in increasing order: the longest common
/// run, then recursively the blocks to its left and right.
pub fn matching_blocks(a: &str, b: &str) -> Vec<(usize, usize, usize)> {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut out = Vec::new();
    let mut work = vec![(0, a.len(), 0, b.len())];
    while let Some((alo, ahi, blo, bhi)) = work.pop() {
        if alo >= ahi || blo >= bhi {
            continue;
        }
        let (i, j, k) = longest_match(&a, &b, alo, ahi, blo, bhi);
        if k == 0 {
            continue;
        }
        out.push((i, j, k));
        work.push((alo, i, blo, j));
        work.push((i + k, ahi, j + k, bhi));
    }
    out.sort_unstable();
    out
}

/// `2M / (|a| + |b|)` over characters, where `M` is the total size of the
/// matching blocks. Two empty strings score 1. Block search depends on
/// argument order, so the shorter string (then the smaller one) goes first.
pub fn raw_similarity(a: &str, b: &str) -> f64 {
    let (a, b) = ordered(a, b);
    let total = a.chars().count() + b.chars().count();
    if total == 0 {
        return 1.0;
    }
    let m: usize = matching_blocks(a, b).iter().map(|b| b.2).sum();
    2.0 * m as f64 / total as f64
}

fn ordered<'s>(a: &'s str, b: &'s str) -> (&'s str, &'s str) {
    if (a.chars().count(), a) <= (b.chars().count(), b) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Similarity of two sentences after [`normalize`].
pub fn similarity(a: &str, b: &str) -> f64 {
    raw_similarity(&normalize(a), &normalize(b))
}
