//! Unknown states handed to the protocols.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::StateVector;

const SECRET_TOL: f64 = 1e-12;

fn check(amps: &[C64]) -> Result<()> {
    if let Some(index) = amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > SECRET_TOL {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

fn gaussian_amps<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// `alpha|0> + beta|1>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQubit", into = "RawQubit")]
pub struct SecretQubit {
    pub alpha: C64,
    pub beta: C64,
}

impl SecretQubit {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        check(&[alpha, beta])?;
        Ok(SecretQubit { alpha, beta })
    }

    pub fn from_reals(alpha: f64, beta: f64) -> Result<Self> {
        SecretQubit::new(C64::new(alpha, 0.0), C64::new(beta, 0.0))
    }

    /// Haar-distributed via normalized complex Gaussians.
    pub fn haar<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let v = gaussian_amps(rng, 2);
        SecretQubit {
            alpha: v[0],
            beta: v[1],
        }
    }

    pub fn state(&self) -> StateVector {
        StateVector::new(vec![self.alpha, self.beta]).expect("validated on construction")
    }
}

/// `alpha|00> + mu|10> + gamma|01> + beta|11>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTwoQubit", into = "RawTwoQubit")]
pub struct SecretTwoQubit {
    pub alpha: C64,
    pub mu: C64,
    pub gamma: C64,
    pub beta: C64,
}

impl SecretTwoQubit {
    pub fn new(alpha: C64, mu: C64, gamma: C64, beta: C64) -> Result<Self> {
        check(&[alpha, mu, gamma, beta])?;
        Ok(SecretTwoQubit { alpha, mu, gamma, beta })
    }

    pub fn from_reals(alpha: f64, mu: f64, gamma: f64, beta: f64) -> Result<Self> {
        let c = |x| C64::new(x, 0.0);
        SecretTwoQubit::new(c(alpha), c(mu), c(gamma), c(beta))
    }

    pub fn haar<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let v = gaussian_amps(rng, 4);
        SecretTwoQubit {
            alpha: v[0],
            mu: v[1],
            gamma: v[2],
            beta: v[3],
        }
    }

    /// Amplitudes in index order |00>, |01>, |10>, |11>.
    pub fn state(&self) -> StateVector {
        StateVector::new(vec![self.alpha, self.gamma, self.mu, self.beta]).expect("validated on construction")
    }
}

/// Either kind of secret; in JSON the two-qubit form is recognized by its
/// `mu` and `gamma` fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Secret {
    Two(SecretTwoQubit),
    One(SecretQubit),
}

impl Secret {
    pub fn state(&self) -> StateVector {
        match self {
            Secret::One(s) => s.state(),
            Secret::Two(s) => s.state(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Secret::One(_) => 1,
            Secret::Two(_) => 2,
        }
    }
}

/// JSON form: each amplitude is a number or a `[re, im]` pair.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawAmp {
    Real(f64),
    Complex([f64; 2]),
}

impl From<RawAmp> for C64 {
    fn from(r: RawAmp) -> C64 {
        match r {
            RawAmp::Real(x) => C64::new(x, 0.0),
            RawAmp::Complex([re, im]) => C64::new(re, im),
        }
    }
}

impl From<C64> for RawAmp {
    fn from(c: C64) -> RawAmp {
        RawAmp::Complex([c.re, c.im])
    }
}

#[derive(Serialize, Deserialize)]
struct RawQubit {
    alpha: RawAmp,
    beta: RawAmp,
}

impl TryFrom<RawQubit> for SecretQubit {
    type Error = Error;
    fn try_from(r: RawQubit) -> Result<Self> {
        SecretQubit::new(r.alpha.into(), r.beta.into())
    }
}

impl From<SecretQubit> for RawQubit {
    fn from(s: SecretQubit) -> Self {
        RawQubit {
            alpha: s.alpha.into(),
            beta: s.beta.into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawTwoQubit {
    alpha: RawAmp,
    mu: RawAmp,
    gamma: RawAmp,
    beta: RawAmp,
}

impl TryFrom<RawTwoQubit> for SecretTwoQubit {
    type Error = Error;
    fn try_from(r: RawTwoQubit) -> Result<Self> {
        SecretTwoQubit::new(r.alpha.into(), r.mu.into(), r.gamma.into(), r.beta.into())
    }
}

impl From<SecretTwoQubit> for RawTwoQubit {
    fn from(s: SecretTwoQubit) -> Self {
        RawTwoQubit {
            alpha: s.alpha.into(),
            mu: s.mu.into(),
            gamma: s.gamma.into(),
            beta: s.beta.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(SecretQubit::from_reals(0.6, 0.8).is_ok());
        assert!(SecretQubit::from_reals(0.6, 0.6).is_err());
        assert!(SecretQubit::from_reals(f64::NAN, 1.0).is_err());
        assert!(SecretTwoQubit::from_reals(0.5, 0.5, 0.5, 0.5).is_ok());
    }

    #[test]
    fn two_qubit_amplitude_order() {
        let s = SecretTwoQubit::from_reals(0.0, 1.0, 0.0, 0.0).unwrap();
        // mu multiplies |10>
        assert_eq!(s.state(), StateVector::from_bits("10").unwrap());
    }

    #[test]
    fn json_forms() {
        let s: SecretQubit = serde_json::from_str(r#"{"alpha":0.6,"beta":[0,0.8]}"#).unwrap();
        assert_eq!(s.beta, C64::new(0.0, 0.8));
        assert!(serde_json::from_str::<SecretQubit>(r#"{"alpha":1,"beta":1}"#).is_err());
        let back: SecretQubit = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn either_kind_from_json() {
        let one: Secret = serde_json::from_str(r#"{"alpha":0.6,"beta":0.8}"#).unwrap();
        assert_eq!(one.n_qubits(), 1);
        let two: Secret = serde_json::from_str(r#"{"alpha":0.6,"mu":0,"gamma":0,"beta":0.8}"#).unwrap();
        assert_eq!(two.n_qubits(), 2);
    }

    #[test]
    fn haar_is_normalized_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let x = SecretTwoQubit::haar(&mut a);
        assert_eq!(x, SecretTwoQubit::haar(&mut b));
        assert!((x.state().norm_sqr() - 1.0).abs() < 1e-12);
    }
}
