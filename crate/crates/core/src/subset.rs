//! Bitmask helpers for subsets of the leaf set `[n]`.
//!
//! Leaf `k` (1-based) is bit `k - 1`, so the mask of `I = {1, 3}` is `0b101`.

/// Maximum number of leaves a tree may carry (leaf sets are `u32` masks).
pub const MAX_LEAVES: usize = 32;

/// Maximum leaf count for dense `2^n` coordinate tables.
pub const MAX_DENSE_LEAVES: usize = 16;

#[inline]
pub fn leaf_bit(label: usize) -> u32 {
    debug_assert!((1..=MAX_LEAVES).contains(&label));
    1u32 << (label - 1)
}

#[inline]
pub fn size(mask: u32) -> usize {
    mask.count_ones() as usize
}

/// Labels (1-based) contained in `mask`, ascending.
pub fn labels(mask: u32) -> impl Iterator<Item = usize> {
    let mut rest = mask;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let bit = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(bit + 1)
        }
    })
}

pub fn from_labels<I: IntoIterator<Item = usize>>(labels: I) -> u32 {
    labels.into_iter().fold(0, |acc, l| acc | leaf_bit(l))
}

/// Smallest label in a non-empty mask.
#[inline]
pub fn min_label(mask: u32) -> usize {
    mask.trailing_zeros() as usize + 1
}

/// All submasks of `mask`, including `0` and `mask`, in decreasing order.
pub fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// Paper-style rendering: `{1,2,4}` becomes `124` (labels joined by `.` once any label exceeds 9).
pub fn render(mask: u32) -> String {
    if mask == 0 {
        return "∅".to_string();
    }
    let ls: Vec<usize> = labels(mask).collect();
    if ls.iter().all(|&l| l < 10) {
        ls.iter().map(|l| l.to_string()).collect()
    } else {
        ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// Renders a block list as `12|34`.
pub fn render_blocks(blocks: &[u32]) -> String {
    blocks.iter().map(|b| render(*b)).collect::<Vec<_>>().join("|")
}
