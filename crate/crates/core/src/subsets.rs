//! Bitmask helpers for subsets of users and relays.

/// Subsets of `{0..n}` as bitmasks, in increasing mask order.
pub fn all(n: usize) -> impl Iterator<Item = u32> {
    0..(1u32 << n)
}

/// Nonempty subsets of `{0..n}`.
pub fn nonempty(n: usize) -> impl Iterator<Item = u32> {
    1..(1u32 << n)
}

pub fn full(n: usize) -> u32 {
    if n == 0 {
        0
    } else {
        (1u32 << n) - 1
    }
}

pub fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

pub fn from_members(items: &[usize]) -> u32 {
    items.iter().fold(0, |m, &i| m | (1 << i))
}

pub fn complement(mask: u32, n: usize) -> u32 {
    full(n) & !mask
}

pub fn size(mask: u32) -> usize {
    mask.count_ones() as usize
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

pub fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &i in p {
        if i >= n || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_count_and_order() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[5], vec![2, 1, 0]);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn mask_round_trip() {
        assert_eq!(members(0b1011), vec![0, 1, 3]);
        assert_eq!(from_members(&[0, 1, 3]), 0b1011);
        assert_eq!(complement(0b01, 2), 0b10);
        assert!(is_permutation(&[2, 0, 1], 3));
        assert!(!is_permutation(&[0, 0, 1], 3));
    }
}
