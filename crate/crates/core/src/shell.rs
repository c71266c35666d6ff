//! Integer vectors by sup-norm shell, in lexicographic order.

use crate::budget;

/// Number of `v ∈ Z^k` with `‖v‖_∞ = h`: `(2h+1)^k − (2h−1)^k` (1 for `h = 0`).
pub fn shell_size(k: usize, h: u64) -> u128 {
    if h == 0 {
        return 1;
    }
    budget::pow_count(2 * h as u128 + 1, k as u32) - budget::pow_count(2 * h as u128 - 1, k as u32)
}

/// Number of nonzero `v ∈ Z^k` with `‖v‖_∞ ≤ h`.
pub fn punctured_box_size(k: usize, h: u64) -> u128 {
    budget::pow_count(2 * h as u128 + 1, k as u32).saturating_sub(1)
}

/// Calls `f` on every `v ∈ Z^k` with `‖v‖_∞ = h`, in lexicographic order.
pub fn for_each_in_shell(k: usize, h: u64, mut f: impl FnMut(&[i64])) {
    let mut buf = vec![0i64; k];
    if k == 0 {
        if h == 0 {
            f(&buf);
        }
        return;
    }
    recurse(h as i64, 0, false, &mut buf, &mut f);
}

fn recurse(h: i64, pos: usize, reached: bool, buf: &mut [i64], f: &mut impl FnMut(&[i64])) {
    if pos == buf.len() {
        f(buf);
        return;
    }
    if pos + 1 == buf.len() && !reached {
        for v in [-h, h] {
            buf[pos] = v;
            f(buf);
            if h == 0 {
                break;
            }
        }
        return;
    }
    for v in -h..=h {
        buf[pos] = v;
        recurse(h, pos + 1, reached || v.abs() == h, buf, f);
    }
}

/// Calls `f` on every nonzero `v` with `‖v‖_∞ ≤ h`, shell by shell.
pub fn for_each_in_punctured_box(k: usize, h: u64, mut f: impl FnMut(&[i64])) {
    for s in 1..=h {
        for_each_in_shell(k, s, &mut f);
    }
}
