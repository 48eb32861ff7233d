//! Radial kernel catalog: spatial evaluation, derivatives and Fourier
//! transforms in dimensions 1 and 2.
//!
//! The transform returned by [`RadialKernel::spectrum`] uses the angular
//! convention `F(xi) = int Phi(x) exp(-i xi.x) dx`, so that
//! `Phi(x) = (2 pi)^-d int F(xi) exp(i xi.x) dxi`. [`FourierValue::tabulated`]
//! converts to the unitary normalization, which divides by `(2 pi)^(d/2)`.

use crate::error::{invalid, Error, Result};
use crate::quadrature;
use crate::special::{bessel_j0, bessel_k, factorial, gamma_half_integer, KOrder};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Polynomial profile of a compactly supported Wendland function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WendlandForm {
    /// `(1 - r)_+^4 (4r + 1)`, C2 in up to three dimensions.
    C2,
    /// `(1 - r)_+^3 (3r + 1)`.
    Cubic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialKernel {
    /// `exp(-c r^2)`
    Gaussian { c: f64 },
    /// `sqrt(r^2 + c^2)`
    Multiquadric { c: f64 },
    /// `1 / sqrt(r^2 + c^2)`
    InverseMultiquadric { c: f64 },
    /// `(-1)^(1 + beta/2) r^beta log r` for even `beta`.
    ThinPlateSpline { beta: u32 },
    /// Wendland profile evaluated at `eps * r`.
    Wendland { eps: f64, form: WendlandForm },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    Classical,
    Generalized,
}

/// Fourier transform value at one frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierValue {
    /// Angular-convention value.
    pub value: f64,
    pub kind: TransformKind,
    pub dim: usize,
}

impl FourierValue {
    /// Value in the unitary normalization used by standard transform tables.
    pub fn tabulated(&self) -> f64 {
        self.value / (2.0 * PI).powf(self.dim as f64 / 2.0)
    }
}

/// How fast the spectrum decays at high frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decay {
    Exponential,
    /// `|F(xi)| ~ |xi|^-p`
    Algebraic(f64),
}

fn check_dim(d: usize) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        invalid(format!("dimension must be 1 or 2, got {d}"))
    }
}

impl RadialKernel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            RadialKernel::Gaussian { c }
            | RadialKernel::Multiquadric { c }
            | RadialKernel::InverseMultiquadric { c } => c.is_finite() && c > 0.0,
            RadialKernel::ThinPlateSpline { beta } => beta >= 2 && beta % 2 == 0,
            RadialKernel::Wendland { eps, .. } => eps.is_finite() && eps > 0.0,
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("bad shape parameter for {self}"))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RadialKernel::Gaussian { .. } => "gaussian",
            RadialKernel::Multiquadric { .. } => "mq",
            RadialKernel::InverseMultiquadric { .. } => "imq",
            RadialKernel::ThinPlateSpline { .. } => "tps",
            RadialKernel::Wendland { .. } => "wendland",
        }
    }

    pub fn transform_kind(&self) -> TransformKind {
        match self {
            RadialKernel::Multiquadric { .. } | RadialKernel::ThinPlateSpline { .. } => {
                TransformKind::Generalized
            }
            _ => TransformKind::Classical,
        }
    }

    pub fn is_generalized(&self) -> bool {
        self.transform_kind() == TransformKind::Generalized
    }

    /// Strictly positive definite (classical, positive spectrum).
    pub fn is_positive_definite(&self) -> bool {
        !self.is_generalized()
    }

    /// Whether the spectrum is unbounded at the origin in dimension `d`.
    pub fn spectrum_singular_at_origin(&self, d: usize) -> bool {
        match self {
            RadialKernel::InverseMultiquadric { .. } => d <= 2,
            RadialKernel::Multiquadric { .. } | RadialKernel::ThinPlateSpline { .. } => true,
            _ => false,
        }
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(self, RadialKernel::Wendland { .. })
    }

    pub fn decay(&self, d: usize) -> Decay {
        match *self {
            RadialKernel::Wendland { form, .. } => {
                // Wendland phi_{d,k} has transform decay |xi|^-(d + 2k + 1).
                let k = match form {
                    WendlandForm::C2 => 1.0,
                    WendlandForm::Cubic => 0.5,
                };
                Decay::Algebraic(d as f64 + 2.0 * k + 1.0)
            }
            RadialKernel::ThinPlateSpline { beta } => Decay::Algebraic(beta as f64 + d as f64),
            _ => Decay::Exponential,
        }
    }

    /// `Phi(r)` for `r >= 0`.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        match *self {
            RadialKernel::Gaussian { c } => (-c * r * r).exp(),
            RadialKernel::Multiquadric { c } => (r * r + c * c).sqrt(),
            RadialKernel::InverseMultiquadric { c } => 1.0 / (r * r + c * c).sqrt(),
            RadialKernel::ThinPlateSpline { beta } => {
                if r == 0.0 {
                    0.0
                } else {
                    let sign = if (beta / 2) % 2 == 1 { 1.0 } else { -1.0 };
                    sign * r.powi(beta as i32) * r.ln()
                }
            }
            RadialKernel::Wendland { eps, form } => {
                let s = eps * r;
                if s >= 1.0 {
                    return 0.0;
                }
                let t = 1.0 - s;
                match form {
                    WendlandForm::C2 => t.powi(4) * (4.0 * s + 1.0),
                    WendlandForm::Cubic => t.powi(3) * (3.0 * s + 1.0),
                }
            }
        }
    }

    /// `Phi` at a point given by its coordinates.
    pub fn eval_vec(&self, x: &[f64]) -> f64 {
        self.eval(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// Second derivative of `x -> Phi(|x|)` in one dimension.
    pub fn second_derivative_1d(&self, r: f64) -> Result<f64> {
        let r = r.abs();
        Ok(match *self {
            RadialKernel::Gaussian { c } => (4.0 * c * c * r * r - 2.0 * c) * (-c * r * r).exp(),
            RadialKernel::Multiquadric { c } => c * c / (r * r + c * c).powf(1.5),
            RadialKernel::InverseMultiquadric { c } => {
                (2.0 * r * r - c * c) / (r * r + c * c).powf(2.5)
            }
            RadialKernel::Wendland { eps, form } => {
                let s = eps * r;
                if s >= 1.0 {
                    return Ok(0.0);
                }
                let t = 1.0 - s;
                let d2 = match form {
                    WendlandForm::C2 => 20.0 * t * t * (4.0 * s - 1.0),
                    WendlandForm::Cubic => 12.0 * t * (3.0 * s - 1.0),
                };
                eps * eps * d2
            }
            RadialKernel::ThinPlateSpline { .. } => {
                return Err(Error::Unsupported("second derivative of TPS".into()))
            }
        })
    }

    /// Fourier transform at radial frequency `xi` in dimension `d`.
    pub fn eval_fourier(&self, xi: f64, d: usize) -> Result<FourierValue> {
        self.validate()?;
        check_dim(d)?;
        if !self.has_closed_form() {
            return Err(Error::NoClosedForm(self.to_string()));
        }
        let xi = xi.abs();
        if xi == 0.0 && self.spectrum_singular_at_origin(d) {
            return Err(Error::Domain(format!("{self} transform is singular at xi = 0 in d = {d}")));
        }
        let df = d as f64;
        let unitary = match *self {
            RadialKernel::Gaussian { c } => (-xi * xi / (4.0 * c)).exp() / (2.0 * c).powf(df / 2.0),
            RadialKernel::InverseMultiquadric { c } => {
                let z = c * xi;
                let order = KOrder::from_twice(d as u32 - 1).expect("d checked");
                c.powi(d as i32 - 1) * (2.0 / PI).sqrt() * bessel_k(order, z)
                    / z.powf((df - 1.0) / 2.0)
            }
            RadialKernel::Multiquadric { c } => {
                let z = c * xi;
                let order = KOrder::from_twice(d as u32 + 1).expect("d checked");
                -c.powi(d as i32 + 1) * (2.0 / PI).sqrt() * bessel_k(order, z)
                    / z.powf((df + 1.0) / 2.0)
            }
            RadialKernel::ThinPlateSpline { beta } => {
                let b = beta as f64;
                2f64.powf(b - 1.0 + df / 2.0)
                    * gamma_half_integer(beta + d as u32)
                    * factorial(beta / 2)
                    * xi.powf(-b - df)
            }
            RadialKernel::Wendland { .. } => unreachable!(),
        };
        Ok(FourierValue {
            value: unitary * (2.0 * PI).powf(df / 2.0),
            kind: self.transform_kind(),
            dim: d,
        })
    }

    /// Angular-convention spectrum, falling back to numerical quadrature for
    /// kernels without a closed form.
    pub fn spectrum(&self, xi: f64, d: usize) -> Result<f64> {
        if self.has_closed_form() {
            Ok(self.eval_fourier(xi, d)?.value)
        } else {
            radial_fourier_numeric(self, xi, d, 1e-13)
        }
    }
}

/// Radial Fourier transform by quadrature, angular convention.
///
/// In `d = 1` this is `2 int_0^inf Phi(t) cos(xi t) dt`, in `d = 2` it is
/// `2 pi int_0^inf Phi(t) t J0(xi t) dt`. Compactly supported and
/// Gaussian kernels are integrated over a finite range; the inverse
/// multiquadric uses a period-split tail with epsilon extrapolation.
pub fn radial_fourier_numeric(k: &RadialKernel, xi: f64, d: usize, tol: f64) -> Result<f64> {
    k.validate()?;
    check_dim(d)?;
    let xi = xi.abs();
    let weight = |t: f64| -> f64 {
        if d == 1 {
            2.0 * (xi * t).cos()
        } else {
            2.0 * PI * t * bessel_j0(xi * t)
        }
    };
    let f = |t: f64| k.eval(t) * weight(t);
    match *k {
        RadialKernel::Wendland { eps, .. } => {
            let (v, _) = quadrature::integrate(f, 0.0, 1.0 / eps, tol * 0.1, 0.0)?;
            Ok(v)
        }
        RadialKernel::Gaussian { c } => {
            // exp(-c t^2) < 1e-17 beyond this radius.
            let cutoff = (39.2 / c).sqrt();
            let (v, _) = quadrature::integrate(f, 0.0, cutoff, tol * 0.1, 0.0)?;
            Ok(v)
        }
        RadialKernel::InverseMultiquadric { c } => {
            if xi == 0.0 {
                return Err(Error::Domain("IMQ transform diverges at xi = 0".into()));
            }
            let half = PI / xi;
            let start = (4.0 * c).max(half);
            quadrature::integrate_oscillatory_tail(f, 0.0, start, half, tol)
        }
        RadialKernel::Multiquadric { .. } | RadialKernel::ThinPlateSpline { .. } => Err(
            Error::Unsupported(format!("{k} is not integrable; only a generalized transform exists")),
        ),
    }
}

impl fmt::Display for RadialKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialKernel::Gaussian { c } => write!(f, "gaussian:c={c}"),
            RadialKernel::Multiquadric { c } => write!(f, "mq:c={c}"),
            RadialKernel::InverseMultiquadric { c } => write!(f, "imq:c={c}"),
            RadialKernel::ThinPlateSpline { beta } => write!(f, "tps:beta={beta}"),
            RadialKernel::Wendland { eps, form } => {
                let form = match form {
                    WendlandForm::C2 => "c2",
                    WendlandForm::Cubic => "cubic",
                };
                write!(f, "wendland:eps={eps},form={form}")
            }
        }
    }
}

/// Parses `name[:key=value[,key=value]]`, for example `imq:c=1`,
/// `tps:beta=2` or `wendland:eps=0.5,form=cubic`.
impl FromStr for RadialKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, p),
            None => (s, ""),
        };
        let mut kv: Vec<(String, String)> = Vec::new();
        for part in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected key=value, got {part:?}")))?;
            kv.push((k.trim().to_ascii_lowercase(), v.trim().to_ascii_lowercase()));
        }
        let get = |keys: &[&str], default: f64| -> Result<f64> {
            match kv.iter().find(|(k, _)| keys.contains(&k.as_str())) {
                Some((k, v)) => v
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad value for {k}: {v:?}"))),
                None => Ok(default),
            }
        };
        let allow = |keys: &[&str]| -> Result<()> {
            for (k, _) in &kv {
                if !keys.contains(&k.as_str()) {
                    return invalid(format!("unknown parameter {k:?} for kernel {name}"));
                }
            }
            Ok(())
        };
        let kernel = match name.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => {
                allow(&["c"])?;
                RadialKernel::Gaussian { c: get(&["c"], 1.0)? }
            }
            "mq" | "multiquadric" => {
                allow(&["c"])?;
                RadialKernel::Multiquadric { c: get(&["c"], 1.0)? }
            }
            "imq" | "inverse-multiquadric" => {
                allow(&["c"])?;
                RadialKernel::InverseMultiquadric { c: get(&["c"], 1.0)? }
            }
            "tps" | "thin-plate" => {
                allow(&["beta"])?;
                let b = get(&["beta"], 2.0)?;
                if b.fract() != 0.0 || !(2.0..=64.0).contains(&b) {
                    return invalid(format!("beta must be an even integer >= 2, got {b}"));
                }
                RadialKernel::ThinPlateSpline { beta: b as u32 }
            }
            "wendland" => {
                allow(&["eps", "form"])?;
                let form = match kv.iter().find(|(k, _)| k == "form").map(|(_, v)| v.as_str()) {
                    None | Some("c2") => WendlandForm::C2,
                    Some("cubic") => WendlandForm::Cubic,
                    Some(other) => return invalid(format!("unknown wendland form {other:?}")),
                };
                RadialKernel::Wendland { eps: get(&["eps"], 1.0)?, form }
            }
            other => return invalid(format!("unknown kernel {other:?}")),
        };
        kernel.validate()?;
        Ok(kernel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn imq() -> RadialKernel {
        RadialKernel::InverseMultiquadric { c: 1.0 }
    }

    #[test]
    fn gaussian_closed_form() {
        let g = RadialKernel::Gaussian { c: 1.0 };
        let v = g.eval_fourier(0.0, 1).unwrap();
        assert!((v.tabulated() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((v.value - PI.sqrt()).abs() < 1e-14);
        assert_eq!(v.kind, TransformKind::Classical);
        let v2 = g.eval_fourier(2.0, 2).unwrap();
        assert!((v2.value - PI * (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn imq_tabulated_value() {
        // mpmath: sqrt(2/pi) * besselk(0, 1)
        let v = imq().eval_fourier(1.0, 1).unwrap();
        assert!((v.tabulated() - 0.335_928_898_992_960_7).abs() < 1e-13);
        assert!((v.value - 2.0 * 0.421_024_438_240_708_3).abs() < 1e-13);
    }

    #[test]
    fn imq_two_dimensional_form() {
        let k = RadialKernel::InverseMultiquadric { c: 0.7 };
        let xi = 1.3;
        let got = k.eval_fourier(xi, 2).unwrap().value;
        let want = 2.0 * PI * (-0.7 * xi).exp() / xi;
        assert!(((got - want) / want).abs() < 1e-14);
    }

    #[test]
    fn mq_is_generalized_and_negative() {
        let k = RadialKernel::Multiquadric { c: 1.0 };
        let v = k.eval_fourier(0.5, 1).unwrap();
        assert_eq!(v.kind, TransformKind::Generalized);
        // mpmath: -2*besselk(1, 0.5)/0.5
        assert!((v.value + 6.625_764_480_013_204).abs() < 1e-12, "{}", v.value);
        assert!(k.eval_fourier(0.0, 1).is_err());
    }

    #[test]
    fn tps_generalized_transform() {
        let k = RadialKernel::ThinPlateSpline { beta: 2 };
        let v = k.eval_fourier(2.0, 2).unwrap();
        // 2^2 * Gamma(2) * 1! * xi^-4
        assert!((v.tabulated() - 4.0 / 16.0).abs() < 1e-15);
        assert!(k.eval_fourier(0.0, 2).is_err());
        assert_eq!(k.decay(2), Decay::Algebraic(4.0));
    }

    #[test]
    fn shape_scaling_imq() {
        let c = 2.5;
        for d in [1, 2] {
            for xi in [0.3, 1.0, 4.0] {
                let a = RadialKernel::InverseMultiquadric { c }.eval_fourier(xi, d).unwrap().value;
                let b = imq().eval_fourier(c * xi, d).unwrap().value * c.powi(d as i32 - 1);
                assert!(((a - b) / b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn numeric_matches_closed_form() {
        for d in [1, 2] {
            for xi in [0.1, 1.0, 5.0] {
                for k in [RadialKernel::Gaussian { c: 1.0 }, imq()] {
                    let want = k.eval_fourier(xi, d).unwrap().value;
                    let got = radial_fourier_numeric(&k, xi, d, 1e-10).unwrap();
                    assert!((got - want).abs() < 1e-8, "{k} d={d} xi={xi}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn wendland_numeric_only() {
        let w = RadialKernel::Wendland { eps: 1.0, form: WendlandForm::C2 };
        assert!(matches!(w.eval_fourier(1.0, 1), Err(Error::NoClosedForm(_))));
        // int_{-1}^{1} (1-|t|)^4 (4|t|+1) dt = 2 * (1/3)
        let v0 = w.spectrum(0.0, 1).unwrap();
        assert!((v0 - 2.0 / 3.0).abs() < 1e-13, "{v0}");
        for xi in [0.5, 3.0, 10.0, 40.0] {
            assert!(w.spectrum(xi, 1).unwrap() > 0.0);
        }
    }

    #[test]
    fn non_integrable_numeric_is_unsupported() {
        let k = RadialKernel::Multiquadric { c: 1.0 };
        assert!(matches!(radial_fourier_numeric(&k, 1.0, 1, 1e-8), Err(Error::Unsupported(_))));
    }

    #[test]
    fn second_derivatives_match_finite_differences() {
        let h = 1e-4;
        let ks = [
            RadialKernel::Gaussian { c: 0.8 },
            RadialKernel::Multiquadric { c: 1.0 },
            imq(),
            RadialKernel::Wendland { eps: 0.5, form: WendlandForm::Cubic },
            RadialKernel::Wendland { eps: 0.5, form: WendlandForm::C2 },
        ];
        for k in ks {
            for r in [0.3, 0.9, 1.4] {
                let fd = (k.eval(r + h) - 2.0 * k.eval(r) + k.eval(r - h)) / (h * h);
                let an = k.second_derivative_1d(r).unwrap();
                assert!((fd - an).abs() < 1e-6, "{k} r={r}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for s in ["imq:c=1", "MQ:c=0.5", "gaussian", "tps:beta=4", "wendland:eps=0.5,form=cubic"] {
            let k: RadialKernel = s.parse().unwrap();
            let again: RadialKernel = k.to_string().parse().unwrap();
            assert_eq!(k, again);
        }
        for bad in ["", "imq:c=-1", "tps:beta=3", "imq:q=2", "foo", "imq:c", "wendland:form=x"] {
            assert!(bad.parse::<RadialKernel>().is_err(), "{bad}");
        }
    }
}
