//! Exact secrecy verification.
//!
//! Every symbol an eavesdropper sees is a linear function of the input
//! vector [message | randoms], so its view is a matrix [A | B] over GF(q).
//! For uniform independent inputs the q-ary entropy of a linear view equals
//! its rank, which makes the mutual information between message and view
//! exactly rank([A | B]) - rank(B): zero iff perfect secrecy. The audit walks
//! every eavesdropper spec within a design budget and proves each leak-free
//! in three recorded steps: the randoms are recoverable from a full view
//! given the message (rank(B) = R), the whole view carries at most R units
//! (rank([A|B]) <= R), and the difference vanishes.
//!
//! A brute-force oracle re-derives the same number on tiny instances by
//! enumerating every input through the concrete codec, with no rank
//! reasoning shared with the fast path.

use crate::gf::FieldElement;
use crate::linalg::MatrixFq;
use crate::pm_codes::{PmError, RepairSymbol};
use crate::secure::SecureCode;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("invalid eavesdropper spec: {0}")]
    InvalidSpec(String),
    #[error("secrecy violation: {leakage} q-ary units leak to {spec}")]
    SecrecyViolation { spec: EavesdropperSpec, leakage: usize },
    #[error("brute force needs {needed} enumerations, budget is {budget}")]
    TooLargeForBruteForce { needed: u128, budget: u64 },
    #[error(transparent)]
    Pm(#[from] PmError),
}

/// Which nodes an eavesdropper reads: stored data of `storage_nodes`, plus
/// all repair downloads of the `repair_nodes` subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EavesdropperSpec {
    storage_nodes: Vec<usize>,
    repair_nodes: Vec<usize>,
}

impl EavesdropperSpec {
    pub fn new(
        mut storage_nodes: Vec<usize>,
        mut repair_nodes: Vec<usize>,
    ) -> Result<Self, AuditError> {
        storage_nodes.sort_unstable();
        storage_nodes.dedup();
        repair_nodes.sort_unstable();
        repair_nodes.dedup();
        for r in &repair_nodes {
            if !storage_nodes.contains(r) {
                return Err(AuditError::InvalidSpec(format!(
                    "repair-observed node {r} is not among the storage nodes"
                )));
            }
        }
        Ok(EavesdropperSpec {
            storage_nodes,
            repair_nodes,
        })
    }

    pub fn storage_only(storage_nodes: Vec<usize>) -> Result<Self, AuditError> {
        Self::new(storage_nodes, Vec::new())
    }

    pub fn storage_nodes(&self) -> &[usize] {
        &self.storage_nodes
    }

    pub fn repair_nodes(&self) -> &[usize] {
        &self.repair_nodes
    }
}

impl std::fmt::Display for EavesdropperSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "storage {:?}", self.storage_nodes)?;
        if !self.repair_nodes.is_empty() {
            write!(f, " + repairs of {:?}", self.repair_nodes)?;
        }
        Ok(())
    }
}

/// The eavesdropper's accumulated linear view. Columns are ordered
/// [message (b_s) | randoms (r)] like the code's input vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationSystem {
    coeffs: MatrixFq,
    b_s: usize,
}

impl ObservationSystem {
    pub fn empty(code: &SecureCode) -> Self {
        ObservationSystem {
            coeffs: MatrixFq::zero(0, code.input_len(), code.modulus()),
            b_s: code.secrecy().b_s,
        }
    }

    /// Appends observation rows (coefficient rows over the input vector).
    pub fn append(&mut self, rows: &MatrixFq) -> Result<(), PmError> {
        self.coeffs = self.coeffs.vstack(rows)?;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.coeffs.rows()
    }

    /// Message-coefficient block A.
    pub fn message_block(&self) -> MatrixFq {
        self.coeffs.submatrix(
            &(0..self.coeffs.rows()).collect::<Vec<_>>(),
            &(0..self.b_s).collect::<Vec<_>>(),
        )
    }

    /// Random-coefficient block B.
    pub fn random_block(&self) -> MatrixFq {
        self.coeffs.submatrix(
            &(0..self.coeffs.rows()).collect::<Vec<_>>(),
            &(self.b_s..self.coeffs.cols()).collect::<Vec<_>>(),
        )
    }

    /// rank([A | B]): q-ary entropy of the whole view.
    pub fn joint_rank(&self) -> usize {
        self.coeffs.rank()
    }

    /// rank(B): q-ary entropy of the view with the message fixed.
    pub fn random_rank(&self) -> usize {
        self.random_block().rank()
    }

    /// Number of random symbols in the code (columns of B).
    pub fn random_count(&self) -> usize {
        self.coeffs.cols() - self.b_s
    }
}

/// Mutual information between message and view, in q-ary units.
pub fn leakage(sys: &ObservationSystem) -> usize {
    sys.joint_rank() - sys.random_rank()
}

/// Whether the randoms are determined by the view once the message is known
/// (rank(B) = R). Holds for full-design views; may fail on smaller ones even
/// though those leak nothing.
pub fn step1_randomness_recoverable(sys: &ObservationSystem) -> bool {
    sys.random_rank() == sys.random_count()
}

/// Whether the whole view carries at most R q-ary units (rank([A|B]) <= R).
pub fn step2_entropy_bound(sys: &ObservationSystem, r: usize) -> bool {
    sys.joint_rank() <= r
}

/// MBR views saturate the entropy bound: a full ell-node view has rank
/// exactly ell*d - ell*(ell-1)/2, the symbol count minus the overlaps forced
/// by the symmetric message matrix.
pub fn mbr_full_view_rank_exact(sys: &ObservationSystem, ell: usize, d: usize) -> bool {
    sys.joint_rank() == ell * d - ell * ell.saturating_sub(1) / 2
}

/// Builds the observation system for a spec: alpha stored rows per storage
/// node plus the full canonical repair view for each repair-observed node
/// (which is helper-independent, so one block per node regardless of how
/// many times it is repaired).
pub fn build_observation(
    code: &SecureCode,
    spec: &EavesdropperSpec,
) -> Result<ObservationSystem, AuditError> {
    let n = code.params().n;
    for &node in spec.storage_nodes() {
        if node == 0 || node > n {
            return Err(AuditError::InvalidSpec(format!(
                "node id {node} out of range 1..={n}"
            )));
        }
    }
    let mut sys = ObservationSystem::empty(code);
    for &node in spec.storage_nodes() {
        sys.append(&code.share_matrix(node)?)?;
    }
    for &node in spec.repair_nodes() {
        sys.append(&code.repair_view_matrix(node)?)?;
    }
    Ok(sys)
}

/// Outcome of one audited spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecOutcome {
    pub spec: EavesdropperSpec,
    pub observed_rows: usize,
    pub joint_rank: usize,
    pub random_rank: usize,
    pub leakage: usize,
    pub step1: bool,
    pub step2: bool,
    /// True when the spec saturates the design budget (|storage| = ell and
    /// |repair| = ell_prime); the step chain must hold on these.
    pub full_design: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub outcomes: Vec<SpecOutcome>,
    pub max_joint_rank: usize,
}

impl AuditReport {
    pub fn spec_count(&self) -> usize {
        self.outcomes.len()
    }
}

fn subsets(items: &[usize], max_size: usize) -> Vec<Vec<usize>> {
    // All subsets of size <= max_size, smallest first, lexicographic within
    // a size; includes the empty subset.
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    let mut by_size: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new()]];
    for size in 1..=max_size.min(items.len()) {
        let mut level = Vec::new();
        for prev in &by_size[size - 1] {
            let start = prev
                .last()
                .map_or(0, |&last| items.iter().position(|&x| x == last).unwrap() + 1);
            for &item in &items[start..] {
                let mut next = prev.clone();
                next.push(item);
                level.push(next);
            }
        }
        out.extend(level.iter().cloned());
        by_size.push(level);
    }
    out
}

/// Audits every spec within an explicit budget: each nonempty storage subset
/// of size <= ell, crossed with each repair subset of size <= ell_prime.
/// Secure codes must show zero leakage everywhere; any leak aborts with the
/// offending spec.
pub fn audit_at(
    code: &SecureCode,
    ell: usize,
    ell_prime: usize,
) -> Result<AuditReport, AuditError> {
    let nodes: Vec<usize> = (1..=code.params().n).collect();
    let mut outcomes = Vec::new();
    let mut max_joint_rank = 0;
    for storage in subsets(&nodes, ell) {
        if storage.is_empty() {
            continue;
        }
        for repair in subsets(&storage, ell_prime) {
            let full_design = storage.len() == ell && repair.len() == ell_prime;
            let spec = EavesdropperSpec::new(storage.clone(), repair)?;
            let sys = build_observation(code, &spec)?;
            let joint = sys.joint_rank();
            let random = sys.random_rank();
            let leak = joint - random;
            max_joint_rank = max_joint_rank.max(joint);
            outcomes.push(SpecOutcome {
                observed_rows: sys.rows(),
                joint_rank: joint,
                random_rank: random,
                leakage: leak,
                step1: step1_randomness_recoverable(&sys),
                step2: step2_entropy_bound(&sys, sys.random_count()),
                full_design,
                spec: spec.clone(),
            });
            if leak > 0 {
                return Err(AuditError::SecrecyViolation {
                    spec,
                    leakage: leak,
                });
            }
        }
    }
    Ok(AuditReport {
        outcomes,
        max_joint_rank,
    })
}

/// Audits the code at its own designed (ell, ell_prime).
pub fn audit_all(code: &SecureCode) -> Result<AuditReport, AuditError> {
    audit_at(code, code.secrecy().ell, code.secrecy().ell_prime)
}

pub const DEFAULT_BRUTE_FORCE_BUDGET: u64 = 1_000_000;

/// Empirical mutual information between message and view in q-ary units,
/// computed by enumerating every input vector through the concrete codec
/// (encode, then read stored symbols and real repair downloads). Shares no
/// rank reasoning with [`leakage`]; exact up to float rounding of count
/// ratios.
pub fn brute_force_leakage(
    code: &SecureCode,
    spec: &EavesdropperSpec,
    budget: Option<u64>,
) -> Result<f64, AuditError> {
    let budget = budget.unwrap_or(DEFAULT_BRUTE_FORCE_BUDGET);
    let q = code.modulus().value();
    let inputs = code.input_len();
    let mut needed: u128 = 1;
    for _ in 0..inputs {
        needed = needed.saturating_mul(q as u128);
        if needed > budget as u128 {
            return Err(AuditError::TooLargeForBruteForce { needed, budget });
        }
    }

    let n = code.params().n;
    let d = code.params().d;
    let b_s = code.secrecy().b_s;
    // Fixed lowest-id helper team per repair-observed node.
    let teams: HashMap<usize, Vec<usize>> = spec
        .repair_nodes()
        .iter()
        .map(|&f| (f, (1..=n).filter(|&h| h != f).take(d).collect()))
        .collect();

    let modulus = code.modulus();
    let mut counter = vec![0u64; inputs];
    let mut count_e: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut count_ue: HashMap<(Vec<u64>, Vec<u64>), u64> = HashMap::new();
    let total = needed as u64;
    for _ in 0..total {
        let input: Vec<FieldElement> = counter.iter().map(|&v| modulus.element(v)).collect();
        let shares = code.encode_input(&input)?;
        let mut view: Vec<u64> = Vec::new();
        for &node in spec.storage_nodes() {
            view.extend(shares[node - 1].symbols.iter().map(|e| e.value()));
        }
        for &f in spec.repair_nodes() {
            for &h in &teams[&f] {
                let sym: RepairSymbol = code.repair_symbol(&shares[h - 1], f)?;
                view.push(sym.value.value());
            }
        }
        let u_key: Vec<u64> = counter[..b_s].to_vec();
        *count_e.entry(view.clone()).or_insert(0) += 1;
        *count_ue.entry((u_key, view)).or_insert(0) += 1;

        // Mixed-radix increment.
        for digit in counter.iter_mut() {
            *digit += 1;
            if *digit < q {
                break;
            }
            *digit = 0;
        }
    }

    let nf = total as f64;
    let logq = (q as f64).ln();
    let h_e: f64 = count_e
        .values()
        .map(|&c| {
            let p = c as f64 / nf;
            -p * p.ln() / logq
        })
        .sum();
    // Every message value pairs with exactly q^r random draws.
    let per_u = q.pow((inputs - b_s) as u32) as f64;
    let h_e_given_u: f64 = count_ue
        .values()
        .map(|&c| {
            let p_joint = c as f64 / nf;
            let p_cond = c as f64 / per_u;
            -p_joint * p_cond.ln() / logq
        })
        .sum();
    Ok(h_e - h_e_given_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldModulus;
    use crate::params::{mbr_params, msr_params};

    fn f(v: u64) -> FieldModulus {
        FieldModulus::new(v).unwrap()
    }

    fn secure_mbr_634() -> SecureCode {
        SecureCode::new(&mbr_params(6, 3, 4, 1).unwrap(), 1, 0, f(7)).unwrap()
    }

    #[test]
    fn single_node_view_of_masked_code() {
        let code = secure_mbr_634();
        let spec = EavesdropperSpec::storage_only(vec![1]).unwrap();
        let sys = build_observation(&code, &spec).unwrap();
        assert_eq!(sys.rows(), 4);
        assert_eq!(sys.joint_rank(), 4); // = ell*d - C(ell,2) at ell=1
        assert_eq!(sys.random_rank(), 4);
        assert_eq!(leakage(&sys), 0);
        assert!(step1_randomness_recoverable(&sys));
        assert!(step2_entropy_bound(&sys, code.secrecy().r));
    }

    #[test]
    fn empty_spec_sees_nothing() {
        let code = secure_mbr_634();
        let spec = EavesdropperSpec::storage_only(vec![]).unwrap();
        let sys = build_observation(&code, &spec).unwrap();
        assert_eq!(sys.rows(), 0);
        assert_eq!(leakage(&sys), 0);
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(
            EavesdropperSpec::new(vec![1], vec![2]),
            Err(AuditError::InvalidSpec(_))
        ));
        let code = secure_mbr_634();
        let spec = EavesdropperSpec::storage_only(vec![7]).unwrap();
        assert!(matches!(
            build_observation(&code, &spec),
            Err(AuditError::InvalidSpec(_))
        ));
    }

    #[test]
    fn audit_masked_code_passes() {
        let code = secure_mbr_634();
        let report = audit_all(&code).unwrap();
        assert_eq!(report.spec_count(), 6);
        assert_eq!(report.max_joint_rank, 4);
        assert!(report.outcomes.iter().all(|o| o.leakage == 0));
        assert!(report.outcomes.iter().all(|o| o.full_design));
    }

    #[test]
    fn audit_plain_code_leaks() {
        let plain = SecureCode::new(&mbr_params(6, 3, 4, 1).unwrap(), 0, 0, f(7)).unwrap();
        let err = audit_at(&plain, 1, 0).unwrap_err();
        match err {
            AuditError::SecrecyViolation { leakage, .. } => assert_eq!(leakage, 4),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn repair_view_is_bounded_by_its_column() {
        // Observing one node plus its repair traffic: the stored symbols are
        // combinations of the repair column's entries, so the joint rank
        // stays at d.
        let code =
            SecureCode::new(&msr_params(6, 3, 4, 1).unwrap(), 1, 1, f(11)).unwrap();
        let spec = EavesdropperSpec::new(vec![2], vec![2]).unwrap();
        let sys = build_observation(&code, &spec).unwrap();
        assert_eq!(sys.rows(), 2 + 4);
        assert!(sys.joint_rank() <= 4);
        assert_eq!(leakage(&sys), 0);

        let report = audit_all(&code).unwrap();
        assert_eq!(report.spec_count(), 12); // 6 nodes x (with/without repair)
    }

    #[test]
    fn sub_design_view_may_fail_step1_yet_leak_nothing() {
        let code = SecureCode::new(&mbr_params(6, 3, 4, 1).unwrap(), 2, 0, f(7)).unwrap();
        let spec = EavesdropperSpec::storage_only(vec![3]).unwrap();
        let sys = build_observation(&code, &spec).unwrap();
        assert_eq!(leakage(&sys), 0);
        assert!(!step1_randomness_recoverable(&sys)); // 4 rows vs R = 7
        let report = audit_all(&code).unwrap();
        for o in &report.outcomes {
            assert_eq!(o.leakage, 0);
            if o.full_design {
                assert!(o.step1 && o.step2);
                assert_eq!(o.joint_rank, 2 * 4 - 1); // ell*d - C(ell,2)
                let sys = build_observation(&code, &o.spec).unwrap();
                assert!(mbr_full_view_rank_exact(&sys, 2, 4));
            }
        }
    }

    #[test]
    fn brute_force_agrees_on_tiny_mbr() {
        let p = mbr_params(3, 2, 2, 1).unwrap();
        let code = SecureCode::new(&p, 1, 0, f(3)).unwrap();
        assert_eq!(code.secrecy().b_s, 1);
        assert_eq!(code.secrecy().r, 2);
        for node in 1..=3 {
            let spec = EavesdropperSpec::storage_only(vec![node]).unwrap();
            let sys = build_observation(&code, &spec).unwrap();
            let mi = brute_force_leakage(&code, &spec, None).unwrap();
            assert_eq!(leakage(&sys), 0);
            assert!(mi.abs() < 1e-9, "node {node}: mi = {mi}");
        }

        // The unmasked code leaks, and both methods agree on how much.
        let plain = SecureCode::new(&p, 0, 0, f(3)).unwrap();
        let spec = EavesdropperSpec::storage_only(vec![1]).unwrap();
        let sys = build_observation(&plain, &spec).unwrap();
        let mi = brute_force_leakage(&plain, &spec, None).unwrap();
        assert_eq!(leakage(&sys), 2);
        assert!((mi - 2.0).abs() < 1e-9, "mi = {mi}");
    }

    #[test]
    fn brute_force_agrees_on_tiny_msr() {
        let p = msr_params(4, 2, 2, 1).unwrap();
        for ell_prime in [0usize, 1] {
            let code = SecureCode::new(&p, 1, ell_prime, f(5)).unwrap();
            for node in 1..=4 {
                let repair = if ell_prime == 1 { vec![node] } else { vec![] };
                let spec = EavesdropperSpec::new(vec![node], repair).unwrap();
                let sys = build_observation(&code, &spec).unwrap();
                let mi = brute_force_leakage(&code, &spec, None).unwrap();
                assert_eq!(leakage(&sys), 0, "ell'={ell_prime} node {node}");
                assert!(mi.abs() < 1e-9, "ell'={ell_prime} node {node}: mi = {mi}");
            }
        }
    }

    #[test]
    fn brute_force_budget_guard() {
        let code = secure_mbr_634(); // 7^9 inputs, far over budget
        let spec = EavesdropperSpec::storage_only(vec![1]).unwrap();
        assert!(matches!(
            brute_force_leakage(&code, &spec, None),
            Err(AuditError::TooLargeForBruteForce { .. })
        ));
    }

    #[test]
    fn subset_enumeration_counts() {
        let items = [1usize, 2, 3, 4];
        assert_eq!(subsets(&items, 0).len(), 1);
        assert_eq!(subsets(&items, 1).len(), 5);
        assert_eq!(subsets(&items, 2).len(), 11);
        assert_eq!(subsets(&items, 4).len(), 16);
    }
}
