//! Impulse corrections for shells that pass each other during a drift.
//!
//! The pair force between shells jumps by w/r² when they cross. A kick–drift–kick
//! step averages the force at both ends of the step, which makes an O(h·Δ)
//! impulse error per crossing. For a crossing at fraction s of the step the
//! exact impulse differs from the kick average by −h(s − ½)ΔF; adding this
//! back restores second-order energy convergence.

/// Impulses for one drift. `r0` must be nondecreasing; `r1` holds the radii of
/// the same characteristics after the drift.
pub(crate) fn crossing_impulses(r0: &[f64], r1: &[f64], w: &[f64], h: f64) -> Vec<f64> {
    let n = r0.len();
    let mut impulse = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut buf = vec![0usize; n];
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            merge(&order[lo..mid], &order[mid..hi], &mut buf[lo..hi], |a, b| {
                // a was inside b and is now outside it
                let d0 = r0[b] - r0[a];
                let d1 = r1[b] - r1[a];
                let s = if d0 - d1 > 0.0 { (d0 / (d0 - d1)).clamp(0.0, 1.0) } else { 0.5 };
                let rc = r0[a] + s * (r1[a] - r0[a]);
                let k = h * (s - 0.5) / (rc * rc);
                impulse[a] += k * w[b];
                impulse[b] -= k * w[a];
            }, r1);
            lo = hi;
        }
        std::mem::swap(&mut order, &mut buf);
        width *= 2;
    }
    impulse
}

fn merge<F: FnMut(usize, usize)>(left: &[usize], right: &[usize], out: &mut [usize], mut pair: F, key: &[f64]) {
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if key[left[i]] <= key[right[j]] {
            out[k] = left[i];
            i += 1;
        } else {
            for &a in &left[i..] {
                pair(a, right[j]);
            }
            out[k] = right[j];
            j += 1;
        }
        k += 1;
    }
    out[k..k + left.len() - i].copy_from_slice(&left[i..]);
    k += left.len() - i;
    out[k..].copy_from_slice(&right[j..]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn no_crossings_no_impulse() {
        let r0 = [1.0, 2.0, 3.0];
        let r1 = [1.1, 2.2, 3.3];
        assert_eq!(crossing_impulses(&r0, &r1, &[0.3, 0.3, 0.4], 0.1), vec![0.0; 3]);
    }

    #[test]
    fn single_crossing_matches_formula() {
        // shells meet at r = 1.5 after a quarter of the step
        let r0 = [1.0, 2.0];
        let r1 = [3.0, 0.0];
        let w = [0.25, 0.75];
        let c = crossing_impulses(&r0, &r1, &w, 0.2);
        let k = 0.2 * (0.25 - 0.5) / (1.5 * 1.5);
        assert_relative_eq!(c[0], k * 0.75, max_relative = 1e-14);
        assert_relative_eq!(c[1], -k * 0.25, max_relative = 1e-14);
    }

    #[test]
    fn enumerates_every_inversion() {
        let n = 40;
        let r0: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let r1: Vec<f64> = (0..n).map(|i| ((i * 17) % n) as f64 + 1.5).collect();
        let w = vec![1.0 / n as f64; n];
        let c = crossing_impulses(&r0, &r1, &w, 1.0);
        let mut brute = vec![0.0; n];
        for a in 0..n {
            for b in a + 1..n {
                if r1[a] > r1[b] {
                    let (d0, d1) = (r0[b] - r0[a], r1[b] - r1[a]);
                    let s = d0 / (d0 - d1);
                    let rc = r0[a] + s * (r1[a] - r0[a]);
                    let k = (s - 0.5) / (rc * rc);
                    brute[a] += k * w[b];
                    brute[b] -= k * w[a];
                }
            }
        }
        for (x, y) in c.iter().zip(&brute) {
            assert_relative_eq!(x, y, epsilon = 1e-15, max_relative = 1e-12);
        }
    }
}
