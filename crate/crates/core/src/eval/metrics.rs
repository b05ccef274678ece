use super::EvalError;
use crate::Scalar;

fn check<T>(y: &[T], yhat: &[T]) -> Result<(), EvalError> {
    if y.len() != yhat.len() {
        return Err(EvalError::LengthMismatch(y.len(), yhat.len()));
    }
    if y.len() < 2 {
        return Err(EvalError::TooShort(y.len()));
    }
    Ok(())
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2<T: Scalar>(y: &[T], yhat: &[T]) -> Result<T, EvalError> {
    check(y, yhat)?;
    let m = crate::scalar::mean(y).expect("len >= 2");
    let ss_tot: T = y.iter().map(|&v| (v - m) * (v - m)).sum();
    if ss_tot <= T::zero() {
        return Err(EvalError::DegenerateVariance);
    }
    let ss_res: T = y.iter().zip(yhat).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok(T::one() - ss_res / ss_tot)
}

/// `1 - (1 - R²)(n - 1)/(n - p - 1)` for `p` predictors.
pub fn adjusted_r2<T: Scalar>(y: &[T], yhat: &[T], p: usize) -> Result<T, EvalError> {
    let n = y.len();
    if n <= p + 1 {
        check(y, yhat)?;
        return Err(EvalError::BadDof { n, p });
    }
    Ok(adjust_r2(r2(y, yhat)?, n, p))
}

pub(crate) fn adjust_r2<T: Scalar>(r2: T, n: usize, p: usize) -> T {
    let nf = T::from_usize_lossy(n);
    let pf = T::from_usize_lossy(p);
    T::one() - (T::one() - r2) * (nf - T::one()) / (nf - pf - T::one())
}

pub fn rmse<T: Scalar>(y: &[T], yhat: &[T]) -> Result<T, EvalError> {
    check(y, yhat)?;
    let s: T = y.iter().zip(yhat).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok((s / T::from_usize_lossy(y.len())).sqrt())
}

pub fn mae<T: Scalar>(y: &[T], yhat: &[T]) -> Result<T, EvalError> {
    check(y, yhat)?;
    let s: T = y.iter().zip(yhat).map(|(&a, &b)| (a - b).abs()).sum();
    Ok(s / T::from_usize_lossy(y.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_fit() {
        let y = [1.0, 4.0, 2.0];
        assert_eq!(r2(&y, &y).unwrap(), 1.0);
        assert_eq!(rmse(&y, &y).unwrap(), 0.0);
        assert_eq!(mae(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn unit_offset() {
        let (y, yh) = ([1.0, 2.0, 3.0], [2.0, 3.0, 4.0]);
        assert_eq!(rmse(&y, &yh).unwrap(), 1.0);
        assert_eq!(mae(&y, &yh).unwrap(), 1.0);
        assert_eq!(r2(&y, &yh).unwrap(), -0.5);
    }

    #[test]
    fn adjusted_by_formula() {
        assert!((adjust_r2(0.9f64, 100, 4) - (1.0 - 0.1 * 99.0 / 95.0)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(r2(&[2.0, 2.0], &[1.0, 3.0]), Err(EvalError::DegenerateVariance));
        assert_eq!(adjusted_r2(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 2), Err(EvalError::BadDof { n: 3, p: 2 }));
        assert_eq!(rmse(&[1.0], &[1.0]), Err(EvalError::TooShort(1)));
        assert_eq!(mae(&[1.0, 2.0], &[1.0]), Err(EvalError::LengthMismatch(2, 1)));
    }

    fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..40).prop_flat_map(|n| {
            (prop::collection::vec(-100.0..100.0f64, n), prop::collection::vec(-100.0..100.0f64, n))
        })
    }

    proptest! {
        #[test]
        fn rmse_dominates_mae((y, yh) in pairs()) {
            let (r, m) = (rmse(&y, &yh).unwrap(), mae(&y, &yh).unwrap());
            prop_assert!(m >= 0.0);
            prop_assert!(r >= m * (1.0 - 1e-12));
        }

        #[test]
        fn adjusted_below_plain((y, yh) in pairs(), p in 1usize..5) {
            prop_assume!(y.len() > p + 1);
            if let Ok(r) = r2(&y, &yh) {
                prop_assert!(adjusted_r2(&y, &yh, p).unwrap() <= r + 1e-12);
            }
        }

        #[test]
        fn r2_affine_invariant((y, yh) in pairs(), a in 0.1..10.0f64, b in -50.0..50.0f64) {
            if let Ok(r) = r2(&y, &yh) {
                let ty: Vec<f64> = y.iter().map(|v| a * v + b).collect();
                let th: Vec<f64> = yh.iter().map(|v| a * v + b).collect();
                let r2t = r2(&ty, &th).unwrap();
                prop_assert!((r2t - r).abs() <= 1e-9 * (1.0 + r.abs()));
            }
        }
    }
}
