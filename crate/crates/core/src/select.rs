//! Floyd-Rivest selection, used to keep the best `k` of a frontier without
//! sorting it whole.

use std::cmp::Ordering;

/// Reorders `v` so that `v[k]` is the element a full sort by `cmp` would
/// place there, with nothing greater before it and nothing smaller after.
pub fn select_nth_by<T, F>(v: &mut [T], k: usize, mut cmp: F)
where
    T: Clone,
    F: FnMut(&T, &T) -> Ordering,
{
    assert!(k < v.len(), "select index {k} out of range for length {}", v.len());
    floyd_rivest(v, 0, v.len() as isize - 1, k as isize, &mut cmp);
}

fn floyd_rivest<T, F>(v: &mut [T], mut left: isize, mut right: isize, k: isize, cmp: &mut F)
where
    T: Clone,
    F: FnMut(&T, &T) -> Ordering,
{
    while right > left {
        if right - left > 600 {
            // Narrow to a sampled window expected to contain the k-th element.
            let n = (right - left + 1) as f64;
            let i = (k - left + 1) as f64;
            let z = n.ln();
            let s = 0.5 * (2.0 * z / 3.0).exp();
            let sd = 0.5 * (z * s * (n - s) / n).sqrt() * if i < n / 2.0 { -1.0 } else { 1.0 };
            let new_left = left.max((k as f64 - i * s / n + sd) as isize);
            let new_right = right.min((k as f64 + (n - i) * s / n + sd) as isize);
            floyd_rivest(v, new_left, new_right, k, cmp);
        }
        let t = v[k as usize].clone();
        let (mut i, mut j) = (left, right);
        v.swap(left as usize, k as usize);
        if cmp(&v[right as usize], &t) == Ordering::Greater {
            v.swap(right as usize, left as usize);
        }
        while i < j {
            v.swap(i as usize, j as usize);
            i += 1;
            j -= 1;
            while cmp(&v[i as usize], &t) == Ordering::Less {
                i += 1;
            }
            while cmp(&v[j as usize], &t) == Ordering::Greater {
                j -= 1;
            }
        }
        if cmp(&v[left as usize], &t) == Ordering::Equal {
            v.swap(left as usize, j as usize);
        } else {
            j += 1;
            v.swap(j as usize, right as usize);
        }
        if j <= k {
            left = j + 1;
        }
        if k <= j {
            right = j - 1;
        }
    }
}

/// Keeps the `k` smallest elements of `v` under `cmp`, sorted.
pub fn top_k_by<T, F>(v: &mut Vec<T>, k: usize, mut cmp: F)
where
    T: Clone,
    F: FnMut(&T, &T) -> Ordering,
{
    if v.len() > k {
        if k == 0 {
            v.clear();
            return;
        }
        select_nth_by(v, k - 1, &mut cmp);
        v.truncate(k);
    }
    v.sort_by(cmp);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_sorting(mut v in proptest::collection::vec(-50i64..50, 1..2000), pick in any::<proptest::sample::Index>()) {
            let k = pick.index(v.len());
            let mut sorted = v.clone();
            sorted.sort();
            select_nth_by(&mut v, k, |a, b| a.cmp(b));
            prop_assert_eq!(v[k], sorted[k]);
            prop_assert!(v[..k].iter().all(|x| *x <= v[k]));
            prop_assert!(v[k + 1..].iter().all(|x| *x >= v[k]));
        }

        #[test]
        fn top_k_equals_sorted_prefix(mut v in proptest::collection::vec(any::<u32>(), 0..3000), k in 0usize..1500) {
            let mut sorted = v.clone();
            sorted.sort();
            sorted.truncate(k);
            top_k_by(&mut v, k, |a, b| a.cmp(b));
            prop_assert_eq!(v, sorted);
        }
    }

    #[test]
    fn large_distinct_input() {
        let mut v: Vec<u64> = (0..100_000u64).map(|i| i.wrapping_mul(2654435761) % 1_000_003).collect();
        let mut sorted = v.clone();
        sorted.sort();
        for k in [0, 1, 777, 50_000, 99_999] {
            select_nth_by(&mut v, k, |a, b| a.cmp(b));
            assert_eq!(v[k], sorted[k]);
        }
    }
}
