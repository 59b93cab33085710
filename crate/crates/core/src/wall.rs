//! Random wall fields and the transforms used to compare walls.

use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Field, Torus};
use crate::noise::{derive_key, CounterSource, LawError, SymmetricLaw};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WallError {
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("q_neginf must lie in [0, 1), got {0}")]
    BadAtom(f64),
    #[error("flat wall height must be finite, got {0}")]
    BadHeight(f64),
    #[error("torus side {side} cannot hold the ball of radius {radius} without wrapping")]
    DomainTooSmall { side: usize, radius: u64 },
}

/// Law of a single wall height before the `-inf` atom is mixed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WallFamily {
    Symmetric(SymmetricLaw),
    /// Every site at `height`.
    Flat(f64),
    /// Every site at `-inf` (no wall).
    NegInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallSpec {
    pub family: WallFamily,
    /// Probability of `-inf` at a site; the finite family is used otherwise.
    pub q_neginf: f64,
}

impl WallSpec {
    pub fn flat(height: f64) -> Self {
        WallSpec {
            family: WallFamily::Flat(height),
            q_neginf: 0.0,
        }
    }

    pub fn free() -> Self {
        WallSpec {
            family: WallFamily::NegInfinity,
            q_neginf: 0.0,
        }
    }

    pub fn symmetric(law: SymmetricLaw) -> Self {
        WallSpec {
            family: WallFamily::Symmetric(law),
            q_neginf: 0.0,
        }
    }

    pub fn with_atom(mut self, q_neginf: f64) -> Self {
        self.q_neginf = q_neginf;
        self
    }

    pub fn validate(&self) -> Result<(), WallError> {
        if !(0.0..1.0).contains(&self.q_neginf) {
            return Err(WallError::BadAtom(self.q_neginf));
        }
        match self.family {
            WallFamily::Symmetric(law) => Ok(law.validate()?),
            WallFamily::Flat(h) if !h.is_finite() => Err(WallError::BadHeight(h)),
            _ => Ok(()),
        }
    }

    /// Tail exponent `theta` of the finite part, `None` for walls with
    /// bounded (or no) finite heights.
    pub fn tail_exponent(&self) -> Option<f64> {
        match self.family {
            WallFamily::Symmetric(law) => Some(law.tail_exponent()),
            _ => None,
        }
    }

    /// `q = P(W >= 0)`.
    pub fn prob_nonnegative(&self) -> f64 {
        let finite = match self.family {
            WallFamily::Symmetric(_) => 0.5,
            WallFamily::Flat(h) => f64::from(u8::from(h >= 0.0)),
            WallFamily::NegInfinity => 0.0,
        };
        (1.0 - self.q_neginf) * finite
    }

    pub fn describe(&self) -> String {
        let base = match self.family {
            WallFamily::Symmetric(law) => law.name(),
            WallFamily::Flat(h) => format!("flat({h})"),
            WallFamily::NegInfinity => "neg_infinity".to_string(),
        };
        if self.q_neginf > 0.0 {
            format!("{base}+atom({})", self.q_neginf)
        } else {
            base
        }
    }

    /// Height at one site from two uniform words.
    fn height(&self, atom_word: u64, value_word: u64) -> f64 {
        if self.q_neginf > 0.0 {
            let u = (atom_word >> 11) as f64 / (1u64 << 53) as f64;
            if u < self.q_neginf {
                return f64::NEG_INFINITY;
            }
        }
        match self.family {
            WallFamily::Symmetric(law) => law.sample_from_bits(value_word),
            WallFamily::Flat(h) => h,
            WallFamily::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

/// A realized wall: one extended-real height per site.
#[derive(Debug, Clone, PartialEq)]
pub struct WallField {
    field: Field,
}

impl WallField {
    pub fn new(field: Field) -> Self {
        WallField { field }
    }

    pub fn free(torus: Torus) -> Self {
        WallField::new(Field::constant(torus, f64::NEG_INFINITY))
    }

    pub fn flat(torus: Torus, height: f64) -> Self {
        WallField::new(Field::constant(torus, height))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn torus(&self) -> Torus {
        self.field.torus()
    }

    pub fn is_free(&self) -> bool {
        self.values().iter().all(|&w| w == f64::NEG_INFINITY)
    }

    pub fn max(&self) -> f64 {
        self.field.max()
    }

    /// Pointwise `self <= other`, with `-inf` below every real.
    pub fn le(&self, other: &WallField) -> bool {
        self.values().iter().zip(other.values()).all(|(a, b)| a <= b)
    }

    /// `-inf` where `W < 0`, `0` where `W >= 0`.
    pub fn hat(&self) -> WallField {
        WallField::new(self.field.map(|w| if w >= 0.0 { 0.0 } else { f64::NEG_INFINITY }))
    }

    /// Keeps `W >= 0`, sends negative heights to `-inf`.
    pub fn tilde(&self) -> WallField {
        WallField::new(self.field.map(|w| if w >= 0.0 { w } else { f64::NEG_INFINITY }))
    }

    /// `(W^i, W_i)`: the wall with site `i` removed, and the wall reduced
    /// to site `i`. Their pointwise max is `self`.
    pub fn decompose_at(&self, site: usize) -> (WallField, WallField) {
        let mut without = self.field.clone();
        without.values_mut()[site] = f64::NEG_INFINITY;
        let mut only = Field::constant(self.torus(), f64::NEG_INFINITY);
        only.values_mut()[site] = self.values()[site];
        (WallField::new(without), WallField::new(only))
    }

    /// Same wall with site `site` raised to `max(W(site), height)`.
    pub fn raised_at(&self, site: usize, height: f64) -> WallField {
        let mut f = self.field.clone();
        let v = &mut f.values_mut()[site];
        *v = v.max(height);
        WallField::new(f)
    }

    /// `R_n = max { W(i) : |i| <= v n }`.
    pub fn running_max(&self, n: u64, range: u32) -> Result<f64, WallError> {
        let radius = n * range as u64;
        let torus = self.torus();
        if !torus.holds_ball(radius) {
            return Err(WallError::DomainTooSmall {
                side: torus.side(),
                radius,
            });
        }
        Ok((0..torus.len())
            .filter(|&i| torus.distance_from_origin(i) <= radius)
            .map(|i| self.values()[i])
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

pub fn hat_transform(wall: &WallField) -> WallField {
    wall.hat()
}

pub fn tilde_transform(wall: &WallField) -> WallField {
    wall.tilde()
}

pub fn decompose_at(wall: &WallField, site: usize) -> (WallField, WallField) {
    wall.decompose_at(site)
}

pub fn running_max(wall: &WallField, n: u64, range: u32) -> Result<f64, WallError> {
    wall.running_max(n, range)
}

/// I.i.d. wall over `torus`. Keys are drawn from the `wall` domain, disjoint
/// from every noise key.
pub fn sample_wall(spec: &WallSpec, seed: u64, replicate: u64, torus: Torus) -> WallField {
    let source = CounterSource::new(derive_key("wall", seed, replicate));
    let mut rng = source.cursor(0);
    let values = (0..torus.len())
        .map(|_| {
            let atom = rng.next_u64();
            let value = rng.next_u64();
            spec.height(atom, value)
        })
        .collect();
    WallField::new(Field::from_vec(torus, values).expect("one value per site"))
}
