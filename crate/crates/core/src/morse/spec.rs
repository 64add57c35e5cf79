use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial on `ℝ^m` as a sum of monomials `c·Π xᵢ^{eᵢ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub vars: usize,
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(vars: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        for (c, e) in &terms {
            if e.len() != vars {
                return Err(Error::DimensionMismatch { expected: vars, found: e.len() });
            }
            if !c.is_finite() {
                return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
            }
        }
        Ok(Self { vars, terms })
    }

    /// `Σ qᵢ xᵢ²`.
    pub fn quadric(q: &[f64]) -> Self {
        let m = q.len();
        let terms = q
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut e = vec![0; m];
                e[i] = 2;
                (c, e)
            })
            .collect();
        Self { vars: m, terms }
    }

    /// Diagonal quadric coefficients, if the polynomial is one.
    pub fn as_quadric(&self) -> Option<Vec<f64>> {
        let mut q = vec![0.0; self.vars];
        for (c, e) in &self.terms {
            let twos: Vec<usize> = (0..self.vars).filter(|&i| e[i] == 2).collect();
            if twos.len() != 1 || e.iter().sum::<u32>() != 2 {
                return None;
            }
            q[twos[0]] += c;
        }
        Some(q)
    }

    fn monomial(e: &[u32], x: &DVector<f64>, skip: &[usize]) -> f64 {
        let mut e = e.to_vec();
        let mut coef = 1.0;
        for &s in skip {
            if e[s] == 0 {
                return 0.0;
            }
            coef *= e[s] as f64;
            e[s] -= 1;
        }
        coef * e.iter().enumerate().map(|(i, &p)| x[i].powi(p as i32)).product::<f64>()
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.terms.iter().map(|(c, e)| c * Self::monomial(e, x, &[])).sum()
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.vars, |i, _| self.terms.iter().map(|(c, e)| c * Self::monomial(e, x, &[i])).sum())
    }

    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.vars, self.vars, |i, j| {
            self.terms.iter().map(|(c, e)| c * Self::monomial(e, x, &[i, j])).sum()
        })
    }

    fn parse_term(text: &str, vars: usize) -> Result<(f64, Vec<u32>)> {
        let err = || Error::Parse(format!("bad polynomial term `{text}`"));
        let mut coef = 1.0;
        let mut e = vec![0u32; vars];
        for factor in text.split('*').map(str::trim) {
            if let Some(rest) = factor.strip_prefix('x').or_else(|| factor.strip_prefix("-x")) {
                if factor.starts_with('-') {
                    coef = -coef;
                }
                let (idx, pow) = match rest.split_once('^') {
                    Some((i, p)) => (i, p.parse::<u32>().map_err(|_| err())?),
                    None => (rest, 1),
                };
                let idx: usize = idx.parse().map_err(|_| err())?;
                if idx >= vars {
                    return Err(err());
                }
                e[idx] += pow;
            } else {
                coef *= factor.parse::<f64>().map_err(|_| err())?;
            }
        }
        Ok((coef, e))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_quadric().filter(|q| q.len() == self.terms.len()) {
            let parts: Vec<String> = q.iter().map(ToString::to_string).collect();
            return write!(f, "quadric:{}", parts.join(","));
        }
        let terms: Vec<String> = self
            .terms
            .iter()
            .map(|(c, e)| {
                let mut s = c.to_string();
                for (i, &p) in e.iter().enumerate().filter(|(_, p)| **p > 0) {
                    s += &if p == 1 { format!("*x{i}") } else { format!("*x{i}^{p}") };
                }
                s
            })
            .collect();
        write!(f, "poly:{}", terms.join(";"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    /// `Σ xᵢ²/aᵢ² = 1`.
    Ellipsoid { axes: Vec<f64> },
    /// `S¹ × S^{n−1}`: points at distance `r` from a circle of radius `big_r`.
    Tube { big_r: f64, r: f64 },
    /// `x ↦ (1 + ε·P(x))·x` over the unit sphere.
    RadialGraph { eps: f64, poly: Polynomial },
}

/// Closed hypersurface `Mⁿ ⊂ ℝ^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypersurfaceSpec {
    pub n: usize,
    #[serde(flatten)]
    pub family: Family,
}

impl HypersurfaceSpec {
    pub fn ellipsoid(axes: Vec<f64>) -> Result<Self> {
        if axes.len() < 3 {
            return Err(Error::DimensionTooSmall { n: axes.len().saturating_sub(1), min: 2 });
        }
        if axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidInput("semi-axes must be positive".into()));
        }
        Ok(Self { n: axes.len() - 1, family: Family::Ellipsoid { axes } })
    }

    pub fn sphere(n: usize, radius: f64) -> Result<Self> {
        Self::ellipsoid(vec![radius; n + 1])
    }

    pub fn tube(n: usize, big_r: f64, r: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, min: 2 });
        }
        if !(r > 0.0 && big_r > r) || !big_r.is_finite() {
            return Err(Error::InvalidInput("tube needs R > r > 0".into()));
        }
        Ok(Self { n, family: Family::Tube { big_r, r } })
    }

    pub fn radial_graph(eps: f64, poly: Polynomial) -> Result<Self> {
        let n = poly.vars.checked_sub(1).filter(|&n| n >= 2).ok_or(Error::DimensionTooSmall {
            n: poly.vars.saturating_sub(1),
            min: 2,
        })?;
        if !eps.is_finite() {
            return Err(Error::InvalidInput("eps must be finite".into()));
        }
        if let Some(q) = poly.as_quadric() {
            // Exact range of a diagonal quadric on the unit sphere.
            let lo = q.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if 1.0 + (eps * lo).min(eps * hi) <= 0.0 {
                return Err(Error::InvalidInput("radial function 1 + eps*P must stay positive".into()));
            }
        }
        Ok(Self { n, family: Family::RadialGraph { eps, poly } })
    }

    /// Euler characteristic of the underlying manifold.
    pub fn euler_characteristic(&self) -> i64 {
        match self.family {
            Family::Tube { .. } => 0,
            _ => 1 + if self.n % 2 == 0 { 1 } else { -1 },
        }
    }

    /// Betti numbers of `Sⁿ` or `S¹ × S^{n−1}`.
    pub fn betti(&self) -> Vec<usize> {
        let n = self.n;
        let mut b = vec![0; n + 1];
        b[0] = 1;
        b[n] += 1;
        if let Family::Tube { .. } = self.family {
            b[1] += 1;
            b[n - 1] += 1;
        }
        b
    }
}

fn kv(part: &str) -> Option<(&str, &str)> {
    part.split_once('=').map(|(k, v)| (k.trim(), v.trim()))
}

fn num(v: &str) -> Result<f64> {
    v.trim().parse().map_err(|_| Error::Parse(format!("bad number `{v}`")))
}

fn parse_poly(text: &str, n: Option<usize>) -> Result<Polynomial> {
    if let Some(rest) = text.strip_prefix("quadric:") {
        let q = rest.split(',').map(num).collect::<Result<Vec<_>>>()?;
        if let Some(n) = n {
            if q.len() != n + 1 {
                return Err(Error::DimensionMismatch { expected: n + 1, found: q.len() });
            }
        }
        Ok(Polynomial::quadric(&q))
    } else if let Some(rest) = text.strip_prefix("poly:") {
        let n = n.ok_or_else(|| Error::Parse("poly: needs n=<dim> before P".into()))?;
        let terms = rest
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(|t| Polynomial::parse_term(t, n + 1))
            .collect::<Result<Vec<_>>>()?;
        Polynomial::new(n + 1, terms)
    } else {
        Err(Error::Parse(format!("unknown polynomial `{text}` (quadric:|poly:)")))
    }
}

impl FromStr for HypersurfaceSpec {
    type Err = Error;

    /// `ellipsoid:a0,...,an`, `sphere:n=4[,r=1]`, `tube:R=2,r=1,n=4`,
    /// `rgraph:eps=0.3,P=quadric:q0,...,qn` or `rgraph:eps=0.1,n=4,P=poly:2*x0^2*x1;-1*x3`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, args) =
            s.trim().split_once(':').ok_or_else(|| Error::Parse(format!("missing `family:` in `{s}`")))?;
        match family.trim().to_ascii_lowercase().as_str() {
            "ellipsoid" => Self::ellipsoid(args.split(',').map(num).collect::<Result<_>>()?),
            "sphere" => {
                let (mut n, mut r) = (None, 1.0);
                for part in args.split(',') {
                    match kv(part) {
                        Some(("n", v)) => n = Some(v.parse().map_err(|_| Error::Parse(format!("bad n `{v}`")))?),
                        Some(("r", v)) => r = num(v)?,
                        _ => return Err(Error::Parse(format!("bad sphere argument `{part}`"))),
                    }
                }
                Self::sphere(n.ok_or_else(|| Error::Parse("sphere needs n=".into()))?, r)
            }
            "tube" => {
                let (mut n, mut big_r, mut r) = (None, None, None);
                for part in args.split(',') {
                    match kv(part) {
                        Some(("n", v)) => n = Some(v.parse().map_err(|_| Error::Parse(format!("bad n `{v}`")))?),
                        Some(("R", v)) => big_r = Some(num(v)?),
                        Some(("r", v)) => r = Some(num(v)?),
                        _ => return Err(Error::Parse(format!("bad tube argument `{part}`"))),
                    }
                }
                match (n, big_r, r) {
                    (Some(n), Some(big_r), Some(r)) => Self::tube(n, big_r, r),
                    _ => Err(Error::Parse("tube needs R=, r= and n=".into())),
                }
            }
            "rgraph" => {
                let (head, poly) = args
                    .split_once("P=")
                    .ok_or_else(|| Error::Parse("rgraph needs P=<polynomial> as its last argument".into()))?;
                let (mut eps, mut n) = (None, None);
                for part in head.split(',').filter(|p| !p.trim().is_empty()) {
                    match kv(part) {
                        Some(("eps", v)) => eps = Some(num(v)?),
                        Some(("n", v)) => n = Some(v.parse().map_err(|_| Error::Parse(format!("bad n `{v}`")))?),
                        _ => return Err(Error::Parse(format!("bad rgraph argument `{part}`"))),
                    }
                }
                let poly = parse_poly(poly.trim(), n)?;
                Self::radial_graph(eps.ok_or_else(|| Error::Parse("rgraph needs eps=".into()))?, poly)
            }
            other => Err(Error::Parse(format!("unknown family `{other}` (ellipsoid|sphere|tube|rgraph)"))),
        }
    }
}

impl fmt::Display for HypersurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Ellipsoid { axes } => {
                let parts: Vec<String> = axes.iter().map(ToString::to_string).collect();
                write!(f, "ellipsoid:{}", parts.join(","))
            }
            Family::Tube { big_r, r } => write!(f, "tube:R={big_r},r={r},n={}", self.n),
            Family::RadialGraph { eps, poly } => write!(f, "rgraph:eps={eps},n={},P={poly}", self.n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let e: HypersurfaceSpec = "ellipsoid:1,1,1,1,2".parse().unwrap();
        assert_eq!(e.n, 4);
        let t: HypersurfaceSpec = "tube:R=2,r=1,n=4".parse().unwrap();
        assert_eq!(t.family, Family::Tube { big_r: 2.0, r: 1.0 });
        let g: HypersurfaceSpec = "rgraph:eps=0.3,P=quadric:1,-1,1,-1,0".parse().unwrap();
        assert_eq!(g.n, 4);
        for s in [e, t, g] {
            assert_eq!(s.to_string().parse::<HypersurfaceSpec>().unwrap(), s);
        }
        let p: HypersurfaceSpec = "rgraph:eps=0.1,n=2,P=poly:2*x0^2*x1;-x2".parse().unwrap();
        assert_eq!(p.to_string().parse::<HypersurfaceSpec>().unwrap(), p);
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "ellipsoid:1,1",
            "ellipsoid:1,-1,1",
            "tube:R=1,r=2,n=3",
            "tube:R=2,r=1",
            "rgraph:eps=2,P=quadric:1,-1,1",
            "rgraph:eps=0.1,P=poly:x0",
            "cone:1",
        ] {
            assert!(bad.parse::<HypersurfaceSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn polynomial_derivatives() {
        let p = Polynomial::new(3, vec![(2.0, vec![2, 1, 0]), (-1.0, vec![0, 0, 3])]).unwrap();
        let x = DVector::from_vec(vec![0.5, -0.3, 0.7]);
        assert!((p.value(&x) - (2.0 * 0.25 * -0.3 - 0.343)).abs() < 1e-15);
        let g = p.gradient(&x);
        assert!((g[0] - 2.0 * 2.0 * 0.5 * -0.3).abs() < 1e-15);
        assert!((g[2] + 3.0 * 0.49).abs() < 1e-15);
        let h = p.hessian(&x);
        assert!((h[(0, 1)] - 4.0 * 0.5).abs() < 1e-15 && (h[(1, 0)] - h[(0, 1)]).abs() == 0.0);
        assert!((h[(2, 2)] + 6.0 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn topology() {
        let t = HypersurfaceSpec::tube(4, 2.0, 1.0).unwrap();
        assert_eq!(t.betti(), vec![1, 1, 0, 1, 1]);
        assert_eq!(t.euler_characteristic(), 0);
        let s = HypersurfaceSpec::sphere(4, 1.0).unwrap();
        assert_eq!(s.betti(), vec![1, 0, 0, 0, 1]);
        assert_eq!(s.euler_characteristic(), 2);
        assert_eq!(HypersurfaceSpec::tube(2, 2.0, 1.0).unwrap().betti(), vec![1, 2, 1]);
    }
}
