//! Product-matrix MBR and MSR codecs.
//!
//! Node i stores the row `psi_i^t M`: the product of its fixed encoding row
//! and a structured symmetric message matrix M. The structure is what makes
//! both operations work with plain linear algebra:
//!
//! - MBR: M is d x d symmetric, [[S, T], [T^t, 0]] with S a k x k symmetric
//!   block and T k x (d-k). A data collector inverts its k encoding rows to
//!   peel off T and then S; a helper sends the single symbol
//!   `psi_h^t M psi_f`, and d such symbols determine `M psi_f`, which by
//!   symmetry is the failed node's share.
//! - MSR (native d = 2k-2): M = [S1; S2] with both alpha x alpha symmetric
//!   and psi_i = [phi_i^t, lambda_i phi_i^t] built from a Vandermonde row,
//!   lambda_i = x_i^alpha. Helpers send `psi_h^t M phi_f`.
//!
//! All constructions run at beta = 1; higher beta and long messages are
//! handled by striping.

use crate::gf::{FieldElement, FieldModulus, GfError};
use crate::linalg::{self, LinalgError, MatrixFq};
use crate::params::{mbr_params, msr_params, CodeMode, CodeParams, ParamsError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PmError {
    #[error("field GF({q}) too small: need {needed} evaluation points")]
    FieldTooSmall { q: u64, needed: usize },
    #[error("GF({q}) has only {found} points with distinct power-{power} values, need {needed}")]
    PointSelectionFailed {
        q: u64,
        power: usize,
        needed: usize,
        found: usize,
    },
    #[error("expected {expected} symbols, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("expected {expected} distinct shares, got {got}")]
    NotEnoughShares { expected: usize, got: usize },
    #[error("expected {expected} distinct helpers, got {got}")]
    NotEnoughHelpers { expected: usize, got: usize },
    #[error("duplicate share from node {0}")]
    DuplicateShare(usize),
    #[error("node {0} cannot help in this repair")]
    InvalidHelper(usize),
    #[error("node id {0} out of range 1..={1}")]
    InvalidNode(usize, usize),
    #[error("stripe layout corrupt: {0}")]
    PaddingError(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// The beta = 1 twin of a parameter set (same n, k, d); constructions always
/// run there and striping restores the requested beta.
pub fn unit_params(p: &CodeParams) -> CodeParams {
    match p.mode {
        CodeMode::Mbr => mbr_params(p.n, p.k, p.d, 1),
        CodeMode::Msr => msr_params(p.n, p.k, p.d, 1),
    }
    .expect("valid params stay valid at beta = 1")
}

/// Picks `count` evaluation points, scanning 1..q-1 and then 0. When `power`
/// is given (MSR), a point is accepted only if its power-th power is fresh,
/// so the derived diagonal scalars stay pairwise distinct.
pub fn select_points(
    q: FieldModulus,
    count: usize,
    power: Option<usize>,
) -> Result<Vec<FieldElement>, PmError> {
    if (q.value() as u128) < count as u128 {
        return Err(PmError::FieldTooSmall {
            q: q.value(),
            needed: count,
        });
    }
    let mut points = Vec::with_capacity(count);
    let mut seen_powers: Vec<u64> = Vec::new();
    let candidates = (1..q.value()).chain(std::iter::once(0));
    for v in candidates {
        if points.len() == count {
            break;
        }
        let x = q.element(v);
        if let Some(a) = power {
            let px = x.pow(a as u64).value();
            if seen_powers.contains(&px) {
                continue;
            }
            seen_powers.push(px);
        }
        points.push(x);
    }
    if points.len() < count {
        return Err(PmError::PointSelectionFailed {
            q: q.value(),
            power: power.unwrap_or(1),
            needed: count,
            found: points.len(),
        });
    }
    Ok(points)
}

/// The fixed per-node encoding rows of a code instance.
///
/// `psi` is n x d Vandermonde on distinct points. For MBR its first k columns
/// form Phi and the rest Delta; for MSR the row for point x is
/// `[phi^t, x^alpha * phi^t]` with phi the first alpha Vandermonde entries.
#[derive(Debug, Clone)]
pub struct EncodingMatrix {
    params: CodeParams, // beta = 1
    modulus: FieldModulus,
    points: Vec<FieldElement>,
    psi: MatrixFq,
}

impl EncodingMatrix {
    /// Builds on the default deterministic point sequence for this field.
    pub fn build(p: &CodeParams, q: FieldModulus) -> Result<Self, PmError> {
        let unit = unit_params(p);
        let power = match unit.mode {
            CodeMode::Mbr => None,
            CodeMode::Msr => Some(unit.alpha),
        };
        let points = select_points(q, unit.n, power)?;
        EncodingMatrix::build_on_points(p, q, points)
    }

    /// Builds on explicit points (used when re-opening a stored layout).
    pub fn build_on_points(
        p: &CodeParams,
        q: FieldModulus,
        points: Vec<FieldElement>,
    ) -> Result<Self, PmError> {
        let unit = unit_params(p);
        if let (CodeMode::Msr, true) = (unit.mode, unit.d != 2 * unit.k - 2) {
            return Err(ParamsError::UnsupportedRegime(format!(
                "native minimum-storage construction needs d = 2k-2, got k={}, d={} \
                 (larger d is reached by shortening)",
                unit.k, unit.d
            ))
            .into());
        }
        if points.len() != unit.n {
            return Err(PmError::LengthMismatch {
                expected: unit.n,
                got: points.len(),
            });
        }
        let psi = match unit.mode {
            CodeMode::Mbr => linalg::vandermonde(&points, unit.d)?,
            CodeMode::Msr => {
                // Row = [phi^t, x^alpha phi^t] equals the plain Vandermonde
                // row [1, x, ..., x^(2*alpha-1)] since d = 2*alpha.
                let m = linalg::vandermonde(&points, unit.d)?;
                let lambdas: Vec<u64> = points.iter().map(|x| x.pow(unit.alpha as u64).value()).collect();
                for (i, li) in lambdas.iter().enumerate() {
                    for lj in &lambdas[i + 1..] {
                        if li == lj {
                            return Err(PmError::PointSelectionFailed {
                                q: q.value(),
                                power: unit.alpha,
                                needed: unit.n,
                                found: i + 1,
                            });
                        }
                    }
                }
                m
            }
        };
        // Construction-time sanity ranks; the per-subset independence is a
        // Vandermonde consequence of distinct points (tested exhaustively
        // for small n in the test suites).
        debug_assert_eq!(psi.rank(), unit.d.min(unit.n));
        Ok(EncodingMatrix {
            params: unit,
            modulus: q,
            points,
            psi,
        })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn modulus(&self) -> FieldModulus {
        self.modulus
    }

    pub fn points(&self) -> &[FieldElement] {
        &self.points
    }

    pub fn psi(&self) -> &MatrixFq {
        &self.psi
    }

    fn check_node(&self, node: usize) -> Result<usize, PmError> {
        if node == 0 || node > self.params.n {
            return Err(PmError::InvalidNode(node, self.params.n));
        }
        Ok(node - 1)
    }

    /// Encoding row of a node (1-based id).
    pub fn psi_row(&self, node: usize) -> Result<&[FieldElement], PmError> {
        Ok(self.psi.row(self.check_node(node)?))
    }

    /// Width of the phi part of a row: k for MBR, alpha for MSR.
    pub fn phi_cols(&self) -> usize {
        match self.params.mode {
            CodeMode::Mbr => self.params.k,
            CodeMode::Msr => self.params.alpha,
        }
    }

    /// First phi_cols entries of a node's encoding row.
    pub fn phi_row(&self, node: usize) -> Result<Vec<FieldElement>, PmError> {
        Ok(self.psi_row(node)?[..self.phi_cols()].to_vec())
    }

    /// Diagonal scalar of a node (MSR only): lambda_i = x_i^alpha.
    pub fn lambda(&self, node: usize) -> Result<FieldElement, PmError> {
        let idx = self.check_node(node)?;
        Ok(self.points[idx].pow(self.params.alpha as u64))
    }

    /// The vector a helper projects its share onto when serving a repair:
    /// psi_f for MBR, phi_f for MSR.
    pub fn repair_vector(&self, failed: usize) -> Result<Vec<FieldElement>, PmError> {
        match self.params.mode {
            CodeMode::Mbr => Ok(self.psi_row(failed)?.to_vec()),
            CodeMode::Msr => self.phi_row(failed),
        }
    }
}

/// Role of a canonical message-matrix slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolRole {
    Message,
    Random,
}

/// Canonical slot order fixing the bijection between a symbol vector and the
/// message matrix. MBR: upper triangle of S row-major, then T row-major.
/// MSR: upper triangle of S1 row-major, then upper triangle of S2 (offset by
/// alpha rows in the stacked matrix). Returns (row, col) positions with the
/// upper-triangle representative for symmetric blocks; length is always B.
pub fn canonical_slots(p: &CodeParams) -> Vec<(usize, usize)> {
    let unit = unit_params(p);
    let mut slots = Vec::with_capacity(unit.b);
    match unit.mode {
        CodeMode::Mbr => {
            for i in 0..unit.k {
                for j in i..unit.k {
                    slots.push((i, j));
                }
            }
            for i in 0..unit.k {
                for j in unit.k..unit.d {
                    slots.push((i, j));
                }
            }
        }
        CodeMode::Msr => {
            let a = unit.alpha;
            for i in 0..a {
                for j in i..a {
                    slots.push((i, j));
                }
            }
            for i in 0..a {
                for j in i..a {
                    slots.push((a + i, j));
                }
            }
        }
    }
    debug_assert_eq!(slots.len(), unit.b);
    slots
}

/// A filled message matrix plus the role of each canonical slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageMatrix {
    m: MatrixFq,
    mode: CodeMode,
    roles: Vec<SymbolRole>,
}

impl MessageMatrix {
    /// Fills the matrix from per-slot values in canonical order, mirroring
    /// each symmetric block.
    pub fn from_slot_values(
        p: &CodeParams,
        q: FieldModulus,
        values: &[FieldElement],
        roles: Vec<SymbolRole>,
    ) -> Result<Self, PmError> {
        let unit = unit_params(p);
        let slots = canonical_slots(&unit);
        if values.len() != slots.len() {
            return Err(PmError::LengthMismatch {
                expected: slots.len(),
                got: values.len(),
            });
        }
        if roles.len() != slots.len() {
            return Err(PmError::LengthMismatch {
                expected: slots.len(),
                got: roles.len(),
            });
        }
        for v in values {
            if v.modulus() != q {
                return Err(GfError::ModulusMismatch(q.value(), v.modulus().value()).into());
            }
        }
        let (mrows, mcols) = match unit.mode {
            CodeMode::Mbr => (unit.d, unit.d),
            CodeMode::Msr => (2 * unit.alpha, unit.alpha),
        };
        let mut m = MatrixFq::zero(mrows, mcols, q);
        for (&(r, c), &v) in slots.iter().zip(values) {
            m.set(r, c, v);
            let (mr, mc) = mirror_slot(&unit, r, c);
            m.set(mr, mc, v);
        }
        Ok(MessageMatrix {
            m,
            mode: unit.mode,
            roles,
        })
    }

    pub fn matrix(&self) -> &MatrixFq {
        &self.m
    }

    pub fn roles(&self) -> &[SymbolRole] {
        &self.roles
    }

    /// Reads the canonical slot values back out.
    pub fn slot_values(&self, p: &CodeParams) -> Vec<FieldElement> {
        canonical_slots(p)
            .iter()
            .map(|&(r, c)| self.m.get(r, c))
            .collect()
    }
}

/// Mirror position of a canonical slot inside its symmetric block.
pub fn mirror_slot(p: &CodeParams, r: usize, c: usize) -> (usize, usize) {
    match p.mode {
        CodeMode::Mbr => (c, r),
        CodeMode::Msr => {
            let a = unit_params(p).alpha;
            if r < a {
                (c, r)
            } else {
                (a + c, r - a)
            }
        }
    }
}

/// Plain (non-secure) packing: all B canonical slots carry message symbols.
pub fn pack_message(
    p: &CodeParams,
    q: FieldModulus,
    message: &[FieldElement],
) -> Result<MessageMatrix, PmError> {
    let unit = unit_params(p);
    MessageMatrix::from_slot_values(&unit, q, message, vec![SymbolRole::Message; unit.b])
}

/// The alpha symbols a node stores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeShare {
    pub node_id: usize,
    pub symbols: Vec<FieldElement>,
}

/// One symbol sent by a helper toward a repair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepairSymbol {
    pub helper_id: usize,
    pub failed_id: usize,
    pub value: FieldElement,
}

/// Encodes a message matrix into all n node shares (share i = psi_i^t M).
pub fn encode(enc: &EncodingMatrix, m: &MessageMatrix) -> Result<Vec<NodeShare>, PmError> {
    let c = enc.psi.matmul(m.matrix())?;
    Ok((0..enc.params.n)
        .map(|i| NodeShare {
            node_id: i + 1,
            symbols: c.row(i).to_vec(),
        })
        .collect())
}

/// Computes the symbol a helper sends for a repair: the projection of its
/// stored row onto the failed node's repair vector.
pub fn repair_symbol(
    enc: &EncodingMatrix,
    helper: &NodeShare,
    failed_id: usize,
) -> Result<RepairSymbol, PmError> {
    enc.check_node(failed_id)?;
    enc.check_node(helper.node_id)?;
    if helper.node_id == failed_id {
        return Err(PmError::InvalidHelper(failed_id));
    }
    if helper.symbols.len() != enc.params.alpha {
        return Err(PmError::LengthMismatch {
            expected: enc.params.alpha,
            got: helper.symbols.len(),
        });
    }
    let v = enc.repair_vector(failed_id)?;
    Ok(RepairSymbol {
        helper_id: helper.node_id,
        failed_id,
        value: linalg::dot(&helper.symbols, &v),
    })
}

fn check_helpers(
    enc: &EncodingMatrix,
    symbols: &[RepairSymbol],
    failed_id: usize,
) -> Result<(), PmError> {
    enc.check_node(failed_id)?;
    if symbols.len() != enc.params.d {
        return Err(PmError::NotEnoughHelpers {
            expected: enc.params.d,
            got: symbols.len(),
        });
    }
    for (i, s) in symbols.iter().enumerate() {
        enc.check_node(s.helper_id)?;
        if s.helper_id == failed_id || s.failed_id != failed_id {
            return Err(PmError::InvalidHelper(s.helper_id));
        }
        if symbols[..i].iter().any(|t| t.helper_id == s.helper_id) {
            return Err(PmError::DuplicateShare(s.helper_id));
        }
    }
    Ok(())
}

/// Solves the d helper equations for `M v_f` (v_f = the repair vector of the
/// failed node) and returns it as a column.
fn solve_repair_column(
    enc: &EncodingMatrix,
    symbols: &[RepairSymbol],
    failed_id: usize,
) -> Result<Vec<FieldElement>, PmError> {
    check_helpers(enc, symbols, failed_id)?;
    let rows: Vec<Vec<FieldElement>> = symbols
        .iter()
        .map(|s| Ok(enc.psi_row(s.helper_id)?.to_vec()))
        .collect::<Result<_, PmError>>()?;
    let psi_rep = MatrixFq::from_rows(rows, enc.modulus)?;
    let rhs = MatrixFq::from_rows(
        symbols.iter().map(|s| vec![s.value]).collect(),
        enc.modulus,
    )?;
    let col = psi_rep.invert()?.matmul(&rhs)?;
    Ok(col.col(0))
}

/// MBR repair: d symbols psi_h^t M psi_f determine M psi_f; by symmetry of M
/// its transpose is exactly the failed node's stored row.
pub fn mbr_repair(
    enc: &EncodingMatrix,
    symbols: &[RepairSymbol],
    failed_id: usize,
) -> Result<NodeShare, PmError> {
    assert_eq!(enc.params.mode, CodeMode::Mbr, "MBR repair on MSR instance");
    let col = solve_repair_column(enc, symbols, failed_id)?;
    Ok(NodeShare {
        node_id: failed_id,
        symbols: col,
    })
}

/// MSR repair: d symbols psi_h^t M phi_f determine M phi_f = [S1 phi_f;
/// S2 phi_f]; the share is (S1 phi_f)^t + lambda_f (S2 phi_f)^t.
pub fn msr_repair(
    enc: &EncodingMatrix,
    symbols: &[RepairSymbol],
    failed_id: usize,
) -> Result<NodeShare, PmError> {
    assert_eq!(enc.params.mode, CodeMode::Msr, "MSR repair on MBR instance");
    let col = solve_repair_column(enc, symbols, failed_id)?;
    let a = enc.params.alpha;
    let lam = enc.lambda(failed_id)?;
    let symbols_out: Vec<FieldElement> = (0..a).map(|j| col[j] + lam * col[a + j]).collect();
    Ok(NodeShare {
        node_id: failed_id,
        symbols: symbols_out,
    })
}

/// Repairs a failed node from d helper symbols, dispatching on mode.
pub fn repair(
    enc: &EncodingMatrix,
    symbols: &[RepairSymbol],
    failed_id: usize,
) -> Result<NodeShare, PmError> {
    match enc.params.mode {
        CodeMode::Mbr => mbr_repair(enc, symbols, failed_id),
        CodeMode::Msr => msr_repair(enc, symbols, failed_id),
    }
}

fn check_shares(enc: &EncodingMatrix, shares: &[&NodeShare]) -> Result<(), PmError> {
    if shares.len() != enc.params.k {
        return Err(PmError::NotEnoughShares {
            expected: enc.params.k,
            got: shares.len(),
        });
    }
    for (i, s) in shares.iter().enumerate() {
        enc.check_node(s.node_id)?;
        if s.symbols.len() != enc.params.alpha {
            return Err(PmError::LengthMismatch {
                expected: enc.params.alpha,
                got: s.symbols.len(),
            });
        }
        if shares[..i].iter().any(|t| t.node_id == s.node_id) {
            return Err(PmError::DuplicateShare(s.node_id));
        }
    }
    Ok(())
}

/// MBR reconstruction from any k shares: peel T off the right block, then S.
/// Returns the B canonical slot values.
pub fn mbr_reconstruct(
    enc: &EncodingMatrix,
    shares: &[&NodeShare],
) -> Result<Vec<FieldElement>, PmError> {
    assert_eq!(enc.params.mode, CodeMode::Mbr, "MBR reconstruct on MSR instance");
    check_shares(enc, shares)?;
    let (k, d) = (enc.params.k, enc.params.d);
    let psi_dc = MatrixFq::from_rows(
        shares
            .iter()
            .map(|s| Ok(enc.psi_row(s.node_id)?.to_vec()))
            .collect::<Result<_, PmError>>()?,
        enc.modulus,
    )?;
    let stored = MatrixFq::from_rows(
        shares.iter().map(|s| s.symbols.clone()).collect(),
        enc.modulus,
    )?;
    let all_rows: Vec<usize> = (0..k).collect();
    let phi_dc = psi_dc.submatrix(&all_rows, &(0..k).collect::<Vec<_>>());
    let delta_dc = psi_dc.submatrix(&all_rows, &(k..d).collect::<Vec<_>>());
    let left = stored.submatrix(&all_rows, &(0..k).collect::<Vec<_>>());
    let right = stored.submatrix(&all_rows, &(k..d).collect::<Vec<_>>());

    let phi_inv = phi_dc.invert()?;
    // stored = [Phi*S + Delta*T^t | Phi*T]
    let t = phi_inv.matmul(&right)?;
    let s = phi_inv
        .matmul(&left)?
        .sub(&phi_inv.matmul(&delta_dc)?.matmul(&t.transpose())?)?;

    let mut out = Vec::with_capacity(enc.params.b);
    for (r, c) in canonical_slots(&enc.params) {
        if c < k {
            out.push(s.get(r, c));
        } else {
            out.push(t.get(r, c - k));
        }
    }
    Ok(out)
}

/// MSR reconstruction from any k shares.
///
/// With W = Psi_DC M Phi_DC^t, entry (i,j) is P_ij + lambda_i Q_ij where
/// P = Phi_DC S1 Phi_DC^t and Q = Phi_DC S2 Phi_DC^t are symmetric. Each
/// off-diagonal pair (W_ij, W_ji) is a 2x2 system in (P_ij, Q_ij) with
/// distinct lambdas, so P and Q are known off the diagonal; row i of P off
/// the diagonal gives alpha evaluations phi_j^t (S1 phi_i), enough to solve
/// for S1 phi_i, and assembling alpha such columns recovers S1 (same for
/// S2 from Q). Returns the B canonical slot values.
pub fn msr_reconstruct(
    enc: &EncodingMatrix,
    shares: &[&NodeShare],
) -> Result<Vec<FieldElement>, PmError> {
    assert_eq!(enc.params.mode, CodeMode::Msr, "MSR reconstruct on MBR instance");
    check_shares(enc, shares)?;
    let (k, a) = (enc.params.k, enc.params.alpha);
    let q = enc.modulus;
    let psi_dc = MatrixFq::from_rows(
        shares
            .iter()
            .map(|s| Ok(enc.psi_row(s.node_id)?.to_vec()))
            .collect::<Result<_, PmError>>()?,
        enc.modulus,
    )?;
    let stored = MatrixFq::from_rows(
        shares.iter().map(|s| s.symbols.clone()).collect(),
        enc.modulus,
    )?;
    let all_rows: Vec<usize> = (0..k).collect();
    let phi_dc = psi_dc.submatrix(&all_rows, &(0..a).collect::<Vec<_>>());
    let lambdas: Vec<FieldElement> = shares
        .iter()
        .map(|s| enc.lambda(s.node_id))
        .collect::<Result<_, PmError>>()?;

    let w = stored.matmul(&phi_dc.transpose())?;
    // Off-diagonal halves of P and Q (diagonals are never needed).
    let mut p = MatrixFq::zero(k, k, q);
    let mut qq = MatrixFq::zero(k, k, q);
    for i in 0..k {
        for j in i + 1..k {
            let diff = lambdas[i] - lambdas[j];
            let q_ij = (w.get(i, j) - w.get(j, i)) * diff.inv()?;
            let p_ij = w.get(i, j) - lambdas[i] * q_ij;
            p.set(i, j, p_ij);
            p.set(j, i, p_ij);
            qq.set(i, j, q_ij);
            qq.set(j, i, q_ij);
        }
    }

    // For each of the first alpha collectors, solve for S phi_i from the
    // alpha evaluations against the other collectors' phi rows.
    let solve_block = |evals: &MatrixFq| -> Result<MatrixFq, PmError> {
        let mut cols = MatrixFq::zero(a, a, q);
        for i in 0..a {
            let others: Vec<usize> = (0..k).filter(|&j| j != i).collect();
            let phi_sub = phi_dc.submatrix(&others, &(0..a).collect::<Vec<_>>());
            let rhs = MatrixFq::from_rows(
                others.iter().map(|&j| vec![evals.get(j, i)]).collect(),
                q,
            )?;
            let v = phi_sub.invert()?.matmul(&rhs)?;
            for r in 0..a {
                cols.set(r, i, v.get(r, 0));
            }
        }
        // cols = S * [phi_0 ... phi_{a-1}] = S * Phi_sel^t.
        let phi_sel = phi_dc.submatrix(&(0..a).collect::<Vec<_>>(), &(0..a).collect::<Vec<_>>());
        Ok(cols.matmul(&phi_sel.transpose().invert()?)?)
    };
    let s1 = solve_block(&p)?;
    let s2 = solve_block(&qq)?;

    let mut out = Vec::with_capacity(enc.params.b);
    for (r, c) in canonical_slots(&enc.params) {
        if r < a {
            out.push(s1.get(r, c));
        } else {
            out.push(s2.get(r - a, c));
        }
    }
    Ok(out)
}

/// Reconstructs the B canonical slot values from any k shares.
pub fn reconstruct(
    enc: &EncodingMatrix,
    shares: &[&NodeShare],
) -> Result<Vec<FieldElement>, PmError> {
    match enc.params.mode {
        CodeMode::Mbr => mbr_reconstruct(enc, shares),
        CodeMode::Msr => msr_reconstruct(enc, shares),
    }
}

/// How a long symbol stream was cut into fixed-size stripes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaddingDescriptor {
    pub stripe_len: usize,
    /// Length of the original stream in symbols (before zero padding).
    pub original_len: usize,
}

/// Splits a symbol stream into stripes of `stripe_len`, zero-padding the
/// last. An empty stream still produces one (all-padding) stripe.
pub fn stripe(
    symbols: &[FieldElement],
    stripe_len: usize,
    q: FieldModulus,
) -> (Vec<Vec<FieldElement>>, PaddingDescriptor) {
    assert!(stripe_len > 0, "stripe length must be positive");
    let count = symbols.len().div_ceil(stripe_len).max(1);
    let mut stripes = Vec::with_capacity(count);
    for i in 0..count {
        let mut s: Vec<FieldElement> = symbols
            .iter()
            .skip(i * stripe_len)
            .take(stripe_len)
            .copied()
            .collect();
        s.resize(stripe_len, q.zero());
        stripes.push(s);
    }
    (
        stripes,
        PaddingDescriptor {
            stripe_len,
            original_len: symbols.len(),
        },
    )
}

/// Inverse of [`stripe`]: concatenates and drops the padding.
pub fn unstripe(
    stripes: &[Vec<FieldElement>],
    desc: &PaddingDescriptor,
) -> Result<Vec<FieldElement>, PmError> {
    let expected = desc.original_len.div_ceil(desc.stripe_len).max(1);
    if stripes.len() != expected {
        return Err(PmError::PaddingError(format!(
            "{} stripes present, {} expected for {} symbols",
            stripes.len(),
            expected,
            desc.original_len
        )));
    }
    for s in stripes {
        if s.len() != desc.stripe_len {
            return Err(PmError::PaddingError(format!(
                "stripe of length {} where {} expected",
                s.len(),
                desc.stripe_len
            )));
        }
    }
    let mut out: Vec<FieldElement> = stripes.iter().flatten().copied().collect();
    out.truncate(desc.original_len);
    Ok(out)
}
