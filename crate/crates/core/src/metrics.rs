//! Figures of merit of a transform against the exact DCT: DCT distortion,
//! total error energy, MSE under a Markov-1 model, coding gain, and
//! transform efficiency.

use std::io::Write;

use crate::error::{Error, Result};
use crate::kernels::{build_dct, OrthonormalTransform};
use crate::matrix::SquareMatrix;
use crate::scalar::Real;

/// First-order Markov covariance model, `R[i][j] = ρ^|i−j|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceModel<T> {
    order: usize,
    rho: T,
}

impl<T: Real> CovarianceModel<T> {
    pub fn new(order: usize, rho: T) -> Result<Self> {
        if !(rho > T::zero() && rho < T::one()) {
            return Err(Error::Domain(format!(
                "correlation coefficient {rho} is outside (0, 1)"
            )));
        }
        if order == 0 {
            return Err(Error::InvalidSize(order));
        }
        Ok(CovarianceModel { order, rho })
    }

    /// Order 16, ρ = 0.95.
    pub fn standard() -> Self {
        Self::new(crate::N, T::lit(0.95)).expect("0.95 is a valid correlation")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rho(&self) -> T {
        self.rho
    }
}

pub fn markov_covariance<T: Real>(model: &CovarianceModel<T>) -> SquareMatrix<T> {
    SquareMatrix::from_fn(model.order, |i, j| model.rho.powi(i.abs_diff(j) as i32))
}

fn reference_dct<T: Real>(candidate: &OrthonormalTransform<T>) -> SquareMatrix<T> {
    build_dct::<T>(candidate.order())
        .expect("orthonormal candidates have order >= 1")
        .matrix()
        .clone()
}

/// `d₂ = 1 − ‖diag(C·C̃ᵀ)‖² / N`.
pub fn dct_distortion<T: Real>(candidate: &OrthonormalTransform<T>) -> T {
    let c = reference_dct(candidate);
    let m = candidate.matrix();
    let n = T::lit(m.order() as f64);
    let diag_sq: T = (0..m.order())
        .map(|i| {
            let d: T = c.row(i).iter().zip(m.row(i)).map(|(&a, &b)| a * b).sum();
            d * d
        })
        .sum();
    T::one() - diag_sq / n
}

/// `ε = π·‖C − C̃‖²_F`.
pub fn total_error_energy<T: Real>(candidate: &OrthonormalTransform<T>) -> T {
    let c = reference_dct(candidate);
    T::PI() * c.sub(candidate.matrix()).frobenius_sq()
}

fn check_model<T: Real>(
    candidate: &OrthonormalTransform<T>,
    model: &CovarianceModel<T>,
) -> Result<()> {
    if model.order != candidate.order() {
        return Err(Error::Shape(format!(
            "covariance model has order {}, transform `{}` has order {}",
            model.order,
            candidate.name(),
            candidate.order()
        )));
    }
    Ok(())
}

/// `MSE = tr((C − C̃)·R·(C − C̃)ᵀ) / N`.
pub fn mse<T: Real>(candidate: &OrthonormalTransform<T>, model: &CovarianceModel<T>) -> Result<T> {
    check_model(candidate, model)?;
    let d = reference_dct(candidate).sub(candidate.matrix());
    let r = markov_covariance(model);
    let e = d.matmul(&r).mul_transposed(&d);
    Ok(e.trace() / T::lit(model.order as f64))
}

/// `C̃·R·C̃ᵀ`.
pub fn transformed_covariance<T: Real>(
    candidate: &OrthonormalTransform<T>,
    model: &CovarianceModel<T>,
) -> Result<SquareMatrix<T>> {
    check_model(candidate, model)?;
    let m = candidate.matrix();
    Ok(m.matmul(&markov_covariance(model)).mul_transposed(m))
}

fn positive_variances<T: Real>(name: &str, s: &SquareMatrix<T>) -> Result<Vec<T>> {
    let diag = s.diagonal();
    if let Some(i) = diag.iter().position(|&v| v.is_nan() || v <= T::zero()) {
        return Err(Error::Degenerate(format!(
            "transform `{name}` has non-positive coefficient variance s[{i}][{i}] = {}",
            diag[i]
        )));
    }
    Ok(diag)
}

/// Coding gain in dB, including the row-norm factor of the general formula.
pub fn coding_gain<T: Real>(
    candidate: &OrthonormalTransform<T>,
    model: &CovarianceModel<T>,
) -> Result<T> {
    let s = transformed_covariance(candidate, model)?;
    let variances = positive_variances(candidate.name(), &s)?;
    let n = T::lit(variances.len() as f64);
    let mean = variances.iter().copied().sum::<T>() / n;
    let log_geo = variances
        .iter()
        .zip(candidate.matrix().rows())
        .map(|(&v, row)| {
            let norm = row.iter().map(|&c| c * c).sum::<T>().sqrt();
            (v * norm).log10()
        })
        .sum::<T>()
        / n;
    Ok(T::lit(10.0) * (mean.log10() - log_geo))
}

/// Coding gain as the ratio of arithmetic to geometric mean of the
/// coefficient variances; valid for orthonormal rows only.
pub fn coding_gain_orthonormal<T: Real>(
    candidate: &OrthonormalTransform<T>,
    model: &CovarianceModel<T>,
) -> Result<T> {
    let s = transformed_covariance(candidate, model)?;
    let variances = positive_variances(candidate.name(), &s)?;
    let n = T::lit(variances.len() as f64);
    let arith = variances.iter().copied().sum::<T>() / n;
    let geo = (variances.iter().map(|v| v.ln()).sum::<T>() / n).exp();
    Ok(T::lit(10.0) * (arith / geo).log10())
}

/// Transform efficiency in percent.
pub fn transform_efficiency<T: Real>(
    candidate: &OrthonormalTransform<T>,
    model: &CovarianceModel<T>,
) -> Result<T> {
    let s = transformed_covariance(candidate, model)?;
    let total: T = s.as_slice().iter().map(|v| v.abs()).sum();
    if total == T::zero() {
        return Err(Error::Degenerate(format!(
            "transform `{}` has an all-zero transformed covariance",
            candidate.name()
        )));
    }
    let diag: T = s.diagonal().iter().map(|v| v.abs()).sum();
    Ok(diag / total * T::lit(100.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport<T> {
    pub name: String,
    pub d2: T,
    pub epsilon: T,
    pub mse: T,
    /// dB
    pub cg: T,
    /// percent
    pub eta: T,
}

pub fn report<T: Real>(
    candidate: &OrthonormalTransform<T>,
    model: &CovarianceModel<T>,
) -> Result<MetricsReport<T>> {
    Ok(MetricsReport {
        name: candidate.name().to_owned(),
        d2: dct_distortion(candidate),
        epsilon: total_error_energy(candidate),
        mse: mse(candidate, model)?,
        cg: coding_gain(candidate, model)?,
        eta: transform_efficiency(candidate, model)?,
    })
}

/// One report per candidate under `model`.
pub fn full_report<T: Real>(
    candidates: &[OrthonormalTransform<T>],
    model: &CovarianceModel<T>,
) -> Result<Vec<MetricsReport<T>>> {
    candidates.iter().map(|c| report(c, model)).collect()
}

/// `printf("%.{digits}g")`-style formatting.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_owned()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV with header `name,d2,epsilon,mse,cg,eta`, six significant digits.
pub fn write_report_csv<T: Real, W: Write>(
    reports: &[MetricsReport<T>],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "name,d2,epsilon,mse,cg,eta")?;
    for r in reports {
        let f = |v: T| format_significant(v.to_f64_lossy(), 6);
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.name,
            f(r.d2),
            f(r.epsilon),
            f(r.mse),
            f(r.cg),
            f(r.eta)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_c_hat, build_wht};

    fn model() -> CovarianceModel<f64> {
        CovarianceModel::standard()
    }

    #[test]
    fn covariance_entries() {
        let r = markov_covariance(&model());
        assert_eq!(r[(0, 0)], 1.0);
        assert!((r[(0, 1)] - 0.95).abs() < 1e-15);
        assert!((r[(0, 15)] - 0.463291).abs() < 1e-6);
        assert_eq!(r, r.transpose());
    }

    #[test]
    fn covariance_rejects_bad_rho() {
        for rho in [0.0, 1.0, -0.3, 1.5, f64::NAN] {
            assert!(matches!(
                CovarianceModel::new(16, rho),
                Err(Error::Domain(_))
            ));
        }
    }

    #[test]
    fn exact_dct_scores_zero_distance() {
        let c = build_dct::<f64>(16).unwrap();
        assert!(dct_distortion(&c).abs() < 1e-12);
        assert!(total_error_energy(&c).abs() < 1e-12);
        assert!(mse(&c, &model()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn both_coding_gain_paths_agree() {
        for c in [build_dct::<f64>(16).unwrap(), build_wht(), build_c_hat()] {
            let a = coding_gain(&c, &model()).unwrap();
            let b = coding_gain_orthonormal(&c, &model()).unwrap();
            assert!((a - b).abs() < 1e-10, "{}: {a} vs {b}", c.name());
        }
    }

    #[test]
    fn order_mismatch_is_a_shape_error() {
        let c = build_c_hat::<f64>();
        let m8 = CovarianceModel::new(8, 0.95).unwrap();
        assert!(matches!(mse(&c, &m8), Err(Error::Shape(_))));
    }

    #[test]
    fn report_is_deterministic() {
        let c = build_c_hat::<f64>();
        let rows = full_report(&[c.clone(), c], &model()).unwrap();
        assert_eq!(rows[0], rows[1]);
        assert!(full_report::<f64>(&[], &model()).unwrap().is_empty());
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.0, 6), "0");
        assert_eq!(format_significant(30.322998, 6), "30.323");
        assert_eq!(format_significant(0.34051123, 6), "0.340511");
        assert_eq!(format_significant(88.4518361, 6), "88.4518");
        assert_eq!(format_significant(9.9999996, 6), "10");
        assert_eq!(format_significant(1234567.0, 6), "1.23457e+06");
        assert_eq!(format_significant(2.220446e-16, 6), "2.22045e-16");
        assert_eq!(format_significant(-0.5, 6), "-0.5");
        assert_eq!(format_significant(f64::INFINITY, 6), "inf");
    }

    #[test]
    fn csv_layout() {
        let rows = full_report(&[build_c_hat::<f64>()], &model()).unwrap();
        let mut buf = Vec::new();
        write_report_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "name,d2,epsilon,mse,cg,eta");
        assert_eq!(
            lines[1],
            "proposed,0.340511,30.323,0.0639428,8.29503,70.8315"
        );
    }
}
