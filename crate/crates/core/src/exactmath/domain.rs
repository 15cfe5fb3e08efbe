use serde::{Deserialize, Serialize};

use super::rational::Rational;
use crate::error::{Error, Result};

/// Axis-aligned closed box inside `[0,1]^m` with `0 <= a_r < b_r <= 1` per axis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct DomainBox {
    bounds: Vec<(Rational, Rational)>,
}

impl DomainBox {
    pub fn new(bounds: Vec<(Rational, Rational)>) -> Result<Self> {
        for (r, (a, b)) in bounds.iter().enumerate() {
            if a.is_negative() || b > &Rational::one() || a >= b {
                return Err(Error::Validation(format!(
                    "interval [{a}, {b}] on axis {} is not of the form 0 <= a < b <= 1",
                    r + 1
                )));
            }
        }
        Ok(DomainBox { bounds })
    }

    pub fn unit(dim: usize) -> Self {
        DomainBox { bounds: vec![(Rational::zero(), Rational::one()); dim] }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn interval(&self, r: usize) -> (&Rational, &Rational) {
        let (a, b) = &self.bounds[r];
        (a, b)
    }

    pub fn bounds(&self) -> &[(Rational, Rational)] {
        &self.bounds
    }

    pub fn volume(&self) -> Rational {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        p.len() == self.dim() && self.bounds.iter().zip(p).all(|((a, b), x)| a <= x && x <= b)
    }

    /// Intersection, or `None` when it has empty interior on some axis.
    pub fn intersect(&self, other: &DomainBox) -> Result<Option<DomainBox>> {
        if self.dim() != other.dim() {
            return Err(Error::Structural(format!(
                "boxes of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let mut out = Vec::with_capacity(self.dim());
        for ((a1, b1), (a2, b2)) in self.bounds.iter().zip(&other.bounds) {
            let a = a1.clone().max(a2.clone());
            let b = b1.clone().min(b2.clone());
            if a >= b {
                return Ok(None);
            }
            out.push((a, b));
        }
        Ok(Some(DomainBox { bounds: out }))
    }

    /// The `2^m` corner points.
    pub fn corners(&self) -> Vec<Vec<Rational>> {
        let m = self.dim();
        (0..1usize << m)
            .map(|mask| {
                (0..m)
                    .map(|r| {
                        let (a, b) = &self.bounds[r];
                        if mask >> r & 1 == 1 {
                            b.clone()
                        } else {
                            a.clone()
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

impl<'de> Deserialize<'de> for DomainBox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let bounds = Vec::<(Rational, Rational)>::deserialize(d)?;
        DomainBox::new(bounds).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rational::q;

    #[test]
    fn rejects_degenerate_and_out_of_range() {
        assert!(DomainBox::new(vec![(q(1, 2), q(1, 2))]).is_err());
        assert!(DomainBox::new(vec![(q(-1, 2), q(1, 2))]).is_err());
        assert!(DomainBox::new(vec![(q(0, 1), q(3, 2))]).is_err());
        assert!(DomainBox::new(vec![(q(0, 1), q(1, 2))]).is_ok());
    }

    #[test]
    fn intersection_and_volume() {
        let a = DomainBox::new(vec![(q(0, 1), q(1, 2)), (q(1, 4), q(1, 1))]).unwrap();
        let b = DomainBox::new(vec![(q(1, 4), q(1, 1)), (q(0, 1), q(1, 2))]).unwrap();
        let c = a.intersect(&b).unwrap().unwrap();
        assert_eq!(c.bounds(), &[(q(1, 4), q(1, 2)), (q(1, 4), q(1, 2))]);
        assert_eq!(c.volume(), q(1, 16));
        let d = DomainBox::new(vec![(q(1, 2), q(1, 1)), (q(0, 1), q(1, 1))]).unwrap();
        assert_eq!(a.intersect(&d).unwrap(), None);
        assert_eq!(a.corners().len(), 4);
    }

    #[test]
    fn serde_validates() {
        let ok: DomainBox = serde_json::from_str(r#"[["0","1/2"]]"#).unwrap();
        assert_eq!(ok.volume(), q(1, 2));
        assert!(serde_json::from_str::<DomainBox>(r#"[["1/2","1/2"]]"#).is_err());
    }
}
