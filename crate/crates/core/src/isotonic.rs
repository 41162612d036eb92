//! Euclidean projection onto nondecreasing sequences (pool adjacent violators).

/// Returns the nondecreasing sequence closest to `y` in least squares.
pub fn project_monotone(y: &[f64]) -> Vec<f64> {
    // blocks of (sum, count), merged while their means decrease
    let mut sums: Vec<f64> = Vec::with_capacity(y.len());
    let mut counts: Vec<usize> = Vec::with_capacity(y.len());
    for &v in y {
        sums.push(v);
        counts.push(1);
        while sums.len() > 1 {
            let k = sums.len() - 1;
            if sums[k - 1] / counts[k - 1] as f64 <= sums[k] / counts[k] as f64 {
                break;
            }
            let (s, c) = (sums.pop().unwrap(), counts.pop().unwrap());
            sums[k - 1] += s;
            counts[k - 1] += c;
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for (s, c) in sums.into_iter().zip(counts) {
        out.extend(std::iter::repeat_n(s / c as f64, c));
    }
    // block means are nondecreasing up to rounding; remove any residual dips
    for i in 1..out.len() {
        if out[i] < out[i - 1] {
            out[i] = out[i - 1];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_cases() {
        assert_eq!(project_monotone(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(project_monotone(&[3.0, 1.0]), vec![2.0, 2.0]);
        assert_eq!(
            project_monotone(&[1.0, 3.0, 2.0, 4.0]),
            vec![1.0, 2.5, 2.5, 4.0]
        );
        assert!(project_monotone(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn output_is_monotone_and_optimal(y in prop::collection::vec(-10.0f64..10.0, 1..60)) {
            let p = project_monotone(&y);
            prop_assert!(p.windows(2).all(|w| w[0] <= w[1]));
            // variational inequality: <y - p, q - p> <= 0 for monotone q;
            // probe with constants and with y sorted
            let mut sorted = y.clone();
            sorted.sort_by(f64::total_cmp);
            let probes = [vec![0.0; y.len()], vec![5.0; y.len()], sorted];
            for q in probes.iter() {
                let ip: f64 = y.iter().zip(&p).zip(q).map(|((a, b), c)| (a - b) * (c - b)).sum();
                prop_assert!(ip <= 1e-9, "ip = {}", ip);
            }
            // the mean is preserved
            let (sy, sp): (f64, f64) = (y.iter().sum(), p.iter().sum());
            prop_assert!((sy - sp).abs() < 1e-9);
        }
    }
}
