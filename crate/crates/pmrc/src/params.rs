//! Parameter validation and the derived counts every code instance needs:
//! storage per node, message capacity, secure capacity, random-symbol count,
//! and the default field modulus.
//!
//! Counts follow the regenerating-code tradeoff endpoints. MBR: a node stores
//! exactly what a repair downloads (alpha = d*beta, B = (kd - C(k,2))*beta).
//! MSR: minimum storage (alpha = (d-k+1)*beta, B = k*alpha), natively built at
//! d = 2k-2 and reaching larger d by shortening (see `secure`).

use crate::gf::{next_prime_at_least, FieldModulus};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("no secure message capacity remains at ell={ell}, ell_prime={ell_prime}")]
    DegenerateSecrecy { ell: usize, ell_prime: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeMode {
    Mbr,
    Msr,
}

impl fmt::Display for CodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeMode::Mbr => write!(f, "mbr"),
            CodeMode::Msr => write!(f, "msr"),
        }
    }
}

impl FromStr for CodeMode {
    type Err = ParamsError;
    fn from_str(s: &str) -> Result<Self, ParamsError> {
        match s.to_ascii_lowercase().as_str() {
            "mbr" => Ok(CodeMode::Mbr),
            "msr" => Ok(CodeMode::Msr),
            other => Err(ParamsError::InvalidParams(format!(
                "unknown mode {other:?} (expected mbr or msr)"
            ))),
        }
    }
}

/// Validated code parameters with their derived counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub beta: usize,
    /// Symbols stored per node.
    pub alpha: usize,
    /// Message symbols per codeword (without secrecy).
    pub b: usize,
    pub mode: CodeMode,
}

/// Secrecy layer counts for a code: how many of the `b` input symbols carry
/// message (`b_s`) and how many are drawn uniformly at random (`r`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecrecyParams {
    /// Eavesdropped-storage node budget.
    pub ell: usize,
    /// Of those, nodes whose repair downloads are also observed.
    pub ell_prime: usize,
    /// Secure message symbols per codeword.
    pub b_s: usize,
    /// Random symbols per codeword; always b - b_s.
    pub r: usize,
}

fn choose2(x: usize) -> usize {
    x * x.saturating_sub(1) / 2
}

fn check_positive(beta: usize, k: usize) -> Result<(), ParamsError> {
    if beta < 1 {
        return Err(ParamsError::InvalidParams("beta must be >= 1".into()));
    }
    if k < 1 {
        return Err(ParamsError::InvalidParams("k must be >= 1".into()));
    }
    Ok(())
}

/// Max-flow bound on the message size of any [n,k,d] regenerating code:
/// sum over i of min(alpha, (d-i)*beta) for i = 0..k.
pub fn cutset_bound(alpha: usize, beta: usize, k: usize, d: usize) -> Result<usize, ParamsError> {
    check_positive(beta, k)?;
    if alpha < 1 {
        return Err(ParamsError::InvalidParams("alpha must be >= 1".into()));
    }
    if k > d {
        return Err(ParamsError::InvalidParams(format!("k={k} exceeds d={d}")));
    }
    Ok((0..k).map(|i| alpha.min((d - i) * beta)).sum())
}

/// Upper bound on secure message size against an eavesdropper reading
/// `ell` nodes: the cut-set sum truncated to i = ell..k.
pub fn secrecy_bound(
    alpha: usize,
    beta: usize,
    k: usize,
    d: usize,
    ell: usize,
) -> Result<usize, ParamsError> {
    if ell >= k {
        return Err(ParamsError::InvalidParams(format!(
            "ell={ell} must be < k={k}"
        )));
    }
    cutset_bound(alpha, beta, k, d)?;
    Ok((ell..k).map(|i| alpha.min((d - i) * beta)).sum())
}

/// Minimum-bandwidth point: alpha = d*beta, B = (kd - C(k,2))*beta.
pub fn mbr_params(n: usize, k: usize, d: usize, beta: usize) -> Result<CodeParams, ParamsError> {
    check_positive(beta, k)?;
    if !(k <= d && d <= n.saturating_sub(1)) {
        return Err(ParamsError::InvalidParams(format!(
            "need k <= d <= n-1, got n={n}, k={k}, d={d}"
        )));
    }
    Ok(CodeParams {
        n,
        k,
        d,
        beta,
        alpha: d * beta,
        b: (k * d - choose2(k)) * beta,
        mode: CodeMode::Mbr,
    })
}

/// Minimum-storage point: alpha = (d-k+1)*beta, B = k*alpha. Supported for
/// d >= 2k-2 (natively at d = 2k-2, larger d via shortening).
pub fn msr_params(n: usize, k: usize, d: usize, beta: usize) -> Result<CodeParams, ParamsError> {
    check_positive(beta, k)?;
    if !(k <= d && d <= n.saturating_sub(1)) {
        return Err(ParamsError::InvalidParams(format!(
            "need k <= d <= n-1, got n={n}, k={k}, d={d}"
        )));
    }
    if d + 2 < 2 * k {
        return Err(ParamsError::UnsupportedRegime(format!(
            "d >= 2k-2 required for the minimum-storage construction, got k={k}, d={d}"
        )));
    }
    let alpha = (d - k + 1) * beta;
    Ok(CodeParams {
        n,
        k,
        d,
        beta,
        alpha,
        b: k * alpha,
        mode: CodeMode::Msr,
    })
}

fn counts(p: &CodeParams, ell: usize, ell_prime: usize) -> Result<SecrecyParams, ParamsError> {
    if ell >= p.k {
        return Err(ParamsError::InvalidParams(format!(
            "ell={ell} must be < k={}",
            p.k
        )));
    }
    if ell_prime > ell {
        return Err(ParamsError::InvalidParams(format!(
            "ell_prime={ell_prime} must be <= ell={ell}"
        )));
    }
    match p.mode {
        CodeMode::Mbr => {
            // Repair downloads reveal nothing extra at the MBR point, so the
            // repair-observed count is irrelevant and normalized to 0.
            let r = (ell * p.d - choose2(ell)) * p.beta;
            Ok(SecrecyParams {
                ell,
                ell_prime: 0,
                b_s: p.b - r,
                r,
            })
        }
        CodeMode::Msr => {
            let b_s = (p.k - ell) * (p.alpha - ell_prime * p.beta);
            Ok(SecrecyParams {
                ell,
                ell_prime,
                b_s,
                r: p.b - b_s,
            })
        }
    }
}

/// Secure message and random-symbol counts for an {ell, ell_prime}
/// eavesdropper. Errors with `DegenerateSecrecy` when no message capacity
/// remains (b_s = 0).
pub fn secure_counts(
    p: &CodeParams,
    ell: usize,
    ell_prime: usize,
) -> Result<SecrecyParams, ParamsError> {
    let s = counts(p, ell, ell_prime)?;
    if s.b_s == 0 {
        return Err(ParamsError::DegenerateSecrecy { ell, ell_prime });
    }
    Ok(s)
}

/// Like [`secure_counts`] but permits b_s = 0, so fully-degenerate corners
/// (all capacity spent on randomness) can still be built and audited.
pub fn secure_counts_allow_degenerate(
    p: &CodeParams,
    ell: usize,
    ell_prime: usize,
) -> Result<SecrecyParams, ParamsError> {
    counts(p, ell, ell_prime)
}

/// Number of single-shortening steps needed to realize these parameters
/// (always 0 for MBR; d - (2k-2) for MSR).
pub fn shortening_steps(p: &CodeParams) -> usize {
    match p.mode {
        CodeMode::Mbr => 0,
        CodeMode::Msr => p.d - (2 * p.k - 2),
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Default field modulus for a parameter set.
///
/// MBR needs only n distinct evaluation points, so the smallest prime >= n
/// works. MSR additionally needs the points' alpha-th powers pairwise
/// distinct (the diagonal scaling of the second encoding-matrix half), and a
/// shortened code needs n + steps points; we take the smallest prime whose
/// field contains enough points with distinct alpha-th powers. Nonzero
/// elements contribute (q-1)/gcd(alpha, q-1) distinct powers and the zero
/// point one more.
pub fn default_modulus(p: &CodeParams) -> FieldModulus {
    let q = match p.mode {
        CodeMode::Mbr => next_prime_at_least(p.n.max(2) as u64),
        CodeMode::Msr => {
            let alpha1 = (p.d - p.k + 1) as u64; // per-stripe alpha (beta = 1)
            let n_points = (p.n + shortening_steps(p)) as u64;
            let mut q = next_prime_at_least(n_points.max(2));
            while (q - 1) / gcd(alpha1, q - 1) + 1 < n_points {
                q = next_prime_at_least(q + 1);
            }
            q
        }
    };
    FieldModulus::new(q).expect("scan yields primes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutset_bound_cases() {
        assert_eq!(cutset_bound(4, 1, 3, 4).unwrap(), 9);
        assert_eq!(cutset_bound(4, 1, 1, 4).unwrap(), 4); // k=1: single min(alpha, d*beta) term
        assert_eq!(cutset_bound(2, 1, 3, 4).unwrap(), 6);
        assert!(matches!(
            cutset_bound(4, 1, 5, 4),
            Err(ParamsError::InvalidParams(_))
        ));
    }

    #[test]
    fn secrecy_bound_cases() {
        assert_eq!(secrecy_bound(4, 1, 3, 4, 1).unwrap(), 5);
        assert_eq!(secrecy_bound(4, 1, 3, 4, 0).unwrap(), cutset_bound(4, 1, 3, 4).unwrap());
        assert_eq!(secrecy_bound(2, 1, 3, 4, 1).unwrap(), 4);
        assert!(matches!(
            secrecy_bound(4, 1, 3, 4, 3),
            Err(ParamsError::InvalidParams(_))
        ));
    }

    #[test]
    fn mbr_params_cases() {
        let p = mbr_params(6, 3, 4, 1).unwrap();
        assert_eq!((p.alpha, p.b), (4, 9));
        let p = mbr_params(8, 1, 5, 1).unwrap();
        assert_eq!((p.alpha, p.b), (5, 5));
        let p = mbr_params(10, 5, 9, 2).unwrap();
        assert_eq!((p.alpha, p.b), (18, 70));
        assert!(mbr_params(6, 3, 6, 1).is_err()); // d must be <= n-1
        assert!(mbr_params(6, 5, 4, 1).is_err()); // k must be <= d
    }

    #[test]
    fn msr_params_cases() {
        let p = msr_params(6, 3, 4, 1).unwrap();
        assert_eq!((p.alpha, p.b), (2, 6));
        let p = msr_params(4, 2, 2, 1).unwrap();
        assert_eq!((p.alpha, p.b), (1, 2));
        let p = msr_params(8, 3, 6, 1).unwrap();
        assert_eq!((p.alpha, p.b), (4, 12));
        assert!(matches!(
            msr_params(6, 3, 3, 1),
            Err(ParamsError::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn secure_counts_cases() {
        let mbr = mbr_params(6, 3, 4, 1).unwrap();
        let s = secure_counts(&mbr, 1, 0).unwrap();
        assert_eq!((s.b_s, s.r), (5, 4));
        // Repair-observation count is normalized away at the MBR point.
        assert_eq!(secure_counts(&mbr, 1, 1).unwrap().ell_prime, 0);

        let msr = msr_params(6, 3, 4, 1).unwrap();
        let s = secure_counts(&msr, 1, 0).unwrap();
        assert_eq!((s.b_s, s.r), (4, 2));
        let s = secure_counts(&msr, 1, 1).unwrap();
        assert_eq!((s.b_s, s.r), (2, 4));

        let s = secure_counts(&msr, 0, 0).unwrap();
        assert_eq!((s.b_s, s.r), (msr.b, 0));

        assert!(matches!(
            secure_counts(&msr, 3, 0),
            Err(ParamsError::InvalidParams(_))
        ));
        assert!(matches!(
            secure_counts(&msr, 1, 2),
            Err(ParamsError::InvalidParams(_))
        ));
    }

    #[test]
    fn degenerate_corner_is_guarded_but_buildable() {
        // Smallest minimum-storage code with every input symbol random.
        let p = msr_params(4, 2, 2, 1).unwrap();
        assert_eq!(
            secure_counts(&p, 1, 1),
            Err(ParamsError::DegenerateSecrecy { ell: 1, ell_prime: 1 })
        );
        let s = secure_counts_allow_degenerate(&p, 1, 1).unwrap();
        assert_eq!((s.b_s, s.r), (0, 2));
    }

    #[test]
    fn mbr_capacity_meets_cutset_bound() {
        for d in 1..=10usize {
            for k in 1..=d {
                let p = mbr_params(d + 1, k, d, 1).unwrap();
                assert_eq!(p.b, cutset_bound(p.alpha, 1, k, d).unwrap());
                let p2 = mbr_params(d + 1, k, d, 3).unwrap();
                assert_eq!(p2.b, cutset_bound(p2.alpha, 3, k, d).unwrap());
            }
        }
    }

    #[test]
    fn secure_capacity_meets_secrecy_bound() {
        for d in 1..=10usize {
            for k in 1..=d {
                let p = mbr_params(d + 1, k, d, 1).unwrap();
                for ell in 0..k {
                    let s = secure_counts_allow_degenerate(&p, ell, 0).unwrap();
                    assert_eq!(s.b_s, secrecy_bound(p.alpha, 1, k, d, ell).unwrap());
                    assert_eq!(s.b_s + s.r, p.b);
                }
            }
        }
        // Minimum-storage codes with no repair observation: (k-ell)*alpha.
        for k in 2..=6usize {
            let d = 2 * k - 2;
            let p = msr_params(d + 1, k, d, 1).unwrap();
            for ell in 0..k {
                let s = secure_counts_allow_degenerate(&p, ell, 0).unwrap();
                assert_eq!(s.b_s, (k - ell) * p.alpha);
                assert_eq!(s.b_s, secrecy_bound(p.alpha, 1, k, d, ell).unwrap());
                assert_eq!(s.b_s + s.r, p.b);
            }
        }
    }

    #[test]
    fn default_modulus_cases() {
        let mbr = mbr_params(6, 3, 4, 1).unwrap();
        assert_eq!(default_modulus(&mbr).value(), 7);

        // alpha=2: squares collide in small fields; first prime with 6
        // distinct-square points (including 0) is 11.
        let msr = msr_params(6, 3, 4, 1).unwrap();
        assert_eq!(default_modulus(&msr).value(), 11);

        // alpha=1: power map is the identity, so the first prime >= n works.
        let tiny = msr_params(4, 2, 2, 1).unwrap();
        assert_eq!(default_modulus(&tiny).value(), 5);

        // Shortened target needs n + steps = 10 points with distinct 4th
        // powers: (q-1)/gcd(4,q-1)+1 reaches 10 first at q=19.
        let shortened = msr_params(8, 3, 6, 1).unwrap();
        assert_eq!(shortening_steps(&shortened), 2);
        assert_eq!(default_modulus(&shortened).value(), 19);
    }
}
