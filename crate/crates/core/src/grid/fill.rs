use crate::Scalar;

use super::GridError;

/// Repairs gaps in an evenly spaced series.
///
/// Interior gaps are interpolated linearly between the nearest observed
/// neighbors; leading gaps take the first observed value (backward fill) and
/// trailing gaps the last observed value.
pub fn fill_series<T: Scalar>(values: &[Option<T>]) -> Result<Vec<T>, GridError> {
    let positions: Vec<T> = (0..values.len()).map(T::from_usize_lossy).collect();
    fill_series_at(&positions, values)
}

/// [`fill_series`] for irregular sampling: interpolation weights follow
/// `positions` (e.g. hours since start), which must be non-decreasing.
pub fn fill_series_at<T: Scalar>(positions: &[T], values: &[Option<T>]) -> Result<Vec<T>, GridError> {
    assert_eq!(positions.len(), values.len(), "positions and values differ in length");
    let known: Vec<usize> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.filter(|x| !x.is_nan()).map(|_| i))
        .collect();
    let (&first, &last) = match (known.first(), known.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(GridError::AllMissing),
    };
    let val = |i: usize| values[i].expect("index of observed value");

    let mut out = Vec::with_capacity(values.len());
    let mut next = 0usize; // index into `known` of the first observed index >= i
    for i in 0..values.len() {
        while next < known.len() && known[next] < i {
            next += 1;
        }
        let v = if i <= first {
            val(first)
        } else if i >= last {
            val(last)
        } else if known[next] == i {
            val(i)
        } else {
            let (lo, hi) = (known[next - 1], known[next]);
            let (x0, x1) = (positions[lo], positions[hi]);
            let (y0, y1) = (val(lo), val(hi));
            if x1 == x0 {
                (y0 + y1) / T::lit(2.0)
            } else {
                let w = (positions[i] - x0) / (x1 - x0);
                y0 + (y1 - y0) * w
            }
        };
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint() {
        assert_eq!(fill_series(&[Some(1.0), None, Some(3.0)]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn leading_gap_backward_filled() {
        assert_eq!(fill_series(&[None, None, Some(4.0)]).unwrap(), vec![4.0, 4.0, 4.0]);
    }

    #[test]
    fn trailing_gap_forward_filled() {
        assert_eq!(fill_series(&[Some(2.0f32), None, None]).unwrap(), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn all_missing() {
        assert_eq!(fill_series::<f64>(&[None, None]), Err(GridError::AllMissing));
        assert_eq!(fill_series::<f64>(&[]), Err(GridError::AllMissing));
    }

    #[test]
    fn weighted_by_position() {
        let out = fill_series_at(&[0.0, 1.0, 4.0], &[Some(0.0), None, Some(8.0)]).unwrap();
        assert_eq!(out, vec![0.0, 2.0, 8.0]);
    }

    proptest! {
        #[test]
        fn fill_invariants(raw in proptest::collection::vec(proptest::option::weighted(0.6, -100.0f64..100.0), 1..40)) {
            prop_assume!(raw.iter().any(|v| v.is_some()));
            let out = fill_series(&raw).unwrap();
            prop_assert_eq!(out.len(), raw.len());
            for (i, v) in raw.iter().enumerate() {
                if let Some(x) = v {
                    prop_assert_eq!(out[i], *x);
                }
            }
            let known: Vec<usize> = raw.iter().enumerate().filter(|(_, v)| v.is_some()).map(|(i, _)| i).collect();
            for w in known.windows(2) {
                let (a, b) = (raw[w[0]].unwrap(), raw[w[1]].unwrap());
                let (lo, hi) = (a.min(b), a.max(b));
                for &v in &out[w[0]..=w[1]] {
                    prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
                }
            }
        }
    }
}
