use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::domain::DomainBox;
use super::rational::Rational;
use crate::error::{Error, Result};

/// Multivariate polynomial over `nvars` clock variables with exact coefficients.
///
/// Terms are keyed by exponent vectors of length `nvars`; zero coefficients are
/// never stored, so the zero polynomial is the empty map.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

/// Wire form of a single term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: Vec<u32>,
    pub coeff: Rational,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = MultiPoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        MultiPoly::constant(nvars, Rational::one())
    }

    /// The variable `x_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = MultiPoly::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = MultiPoly::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::Structural(format!(
                    "exponent vector of length {} in a polynomial over {} variables",
                    e.len(),
                    nvars
                )));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn from_json_terms(nvars: usize, terms: Vec<TermJson>) -> Result<Self> {
        MultiPoly::from_terms(nvars, terms.into_iter().map(|t| (t.exponents, t.coeff)))
    }

    pub fn to_json_terms(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(e, c)| TermJson { exponents: e.clone(), coeff: c.clone() })
            .collect()
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant value if the polynomial has no non-constant terms.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn check_same(&self, other: &MultiPoly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::Structural(format!(
                "polynomials over {} and {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.add(&other.scale(&Rational::integer(-1)))
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_same(other)?;
        let mut out = MultiPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        Ok(out)
    }

    /// Product with every term of total degree above `max_degree` dropped.
    pub fn mul_truncated(&self, other: &MultiPoly, max_degree: u32) -> Result<MultiPoly> {
        self.check_same(other)?;
        let mut out = MultiPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            let d1: u32 = e1.iter().sum();
            for (e2, c2) in &other.terms {
                if d1 + e2.iter().sum::<u32>() > max_degree {
                    continue;
                }
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: &Rational) -> MultiPoly {
        if k.is_zero() {
            return MultiPoly::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn truncate(&self, max_degree: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() <= max_degree)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.nvars {
            return Err(Error::Structural(format!(
                "point of dimension {} for a polynomial over {} variables",
                point.len(),
                self.nvars
            )));
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= x.pow(k);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .fold(c.to_f64(), |t, (&k, &x)| t * x.powi(k as i32))
            })
            .sum()
    }

    /// Exact integral over a box: each monomial contributes
    /// `prod_r (b_r^(e_r+1) - a_r^(e_r+1)) / (e_r+1)`.
    pub fn integrate_box(&self, d: &DomainBox) -> Result<Rational> {
        if d.dim() != self.nvars {
            return Err(Error::Structural(format!(
                "box of dimension {} for a polynomial over {} variables",
                d.dim(),
                self.nvars
            )));
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (r, &k) in e.iter().enumerate() {
                let (a, b) = d.interval(r);
                let k1 = k + 1;
                t *= (b.pow(k1) - a.pow(k1)) / Rational::integer(k1 as i64);
            }
            acc += t;
        }
        Ok(acc)
    }
}

pub fn poly_mul(p: &MultiPoly, q: &MultiPoly) -> Result<MultiPoly> {
    p.mul(q)
}

pub fn integrate_box(p: &MultiPoly, d: &DomainBox) -> Result<Rational> {
    p.integrate_box(d)
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rational::q;

    fn x() -> MultiPoly {
        MultiPoly::var(1, 0)
    }

    fn c(v: Rational) -> MultiPoly {
        MultiPoly::constant(1, v)
    }

    #[test]
    fn product_of_counterexample_pair() {
        let a = x().add(&c(q(1, 2))).unwrap();
        let b = c(q(1, 2)).sub(&x()).unwrap();
        let p = poly_mul(&a, &b).unwrap();
        let want = c(q(1, 4)).sub(&x().mul(&x()).unwrap()).unwrap();
        assert_eq!(p, want);
        assert_eq!(p.mul(&MultiPoly::one(1)).unwrap(), p);
        let sq = p.mul(&p).unwrap();
        let want_sq = MultiPoly::from_terms(
            1,
            vec![(vec![0], q(1, 16)), (vec![2], q(-1, 2)), (vec![4], q(1, 1))],
        )
        .unwrap();
        assert_eq!(sq, want_sq);
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let p = x().sub(&x()).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
    }

    #[test]
    fn integrals_of_counterexample_products() {
        let d = DomainBox::new(vec![(q(0, 1), q(1, 2))]).unwrap();
        let a = x().add(&c(q(1, 2))).unwrap();
        let b = c(q(1, 2)).sub(&x()).unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(integrate_box(&p, &d).unwrap(), q(1, 12));
        assert_eq!(integrate_box(&p.mul(&p).unwrap(), &d).unwrap(), q(1, 60));
        let unit = DomainBox::unit(3);
        assert_eq!(integrate_box(&MultiPoly::one(3), &unit).unwrap(), q(1, 1));
    }

    #[test]
    fn mismatched_variable_lists_are_structural_errors() {
        let p = MultiPoly::var(2, 0);
        assert!(matches!(p.mul(&x()), Err(Error::Structural(_))));
        assert!(matches!(p.eval(&[q(1, 1)]), Err(Error::Structural(_))));
    }

    #[test]
    fn json_terms_roundtrip() {
        let p = MultiPoly::from_terms(2, vec![(vec![1, 0], q(1, 2)), (vec![0, 2], q(-3, 1))]).unwrap();
        let s = serde_json::to_string(&p.to_json_terms()).unwrap();
        assert_eq!(
            s,
            r#"[{"exponents":[0,2],"coeff":"-3"},{"exponents":[1,0],"coeff":"1/2"}]"#
        );
        let back: Vec<TermJson> = serde_json::from_str(&s).unwrap();
        assert_eq!(MultiPoly::from_json_terms(2, back).unwrap(), p);
    }
}
