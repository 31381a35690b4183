//! Secrecy layer: turns a plain product-matrix code into an {ell, ell_prime}
//! secure one by replacing a carefully chosen set of R message slots with
//! uniform random symbols, and extends minimum-storage codes to d > 2k-2 by
//! shortening.
//!
//! The chosen slots are exactly the ones an eavesdropper on ell nodes (plus
//! repair traffic of ell_prime of them) can see combinations of; with them
//! randomized, every observed symbol is masked. [`SecureCode`] is the single
//! runtime object the rest of the crate works with: a plain code is the
//! degenerate ell = 0 case, and a shortened code wraps its parent recursively
//! (a virtual highest-indexed node is pinned to the all-zero share by making
//! some parent random slots linear functions of the remaining inputs).
//!
//! Inputs are always ordered [message (b_s) | randoms (r)]; the secrecy audit
//! reads observation coefficients in this basis.

use crate::gf::{uniform_sample, FieldElement, FieldModulus, RandomnessSource};
use crate::linalg::MatrixFq;
use crate::params::{
    msr_params, secure_counts_allow_degenerate, CodeMode, CodeParams, ParamsError, SecrecyParams,
};
use crate::pm_codes::{
    self, canonical_slots, unit_params, EncodingMatrix, MessageMatrix, NodeShare, PmError,
    RepairSymbol, SymbolRole,
};

/// The canonical matrix slots that carry random symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementMap {
    /// (row, col) canonical positions, in canonical slot order.
    pub random_slots: Vec<(usize, usize)>,
}

impl PlacementMap {
    pub fn len(&self) -> usize {
        self.random_slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.random_slots.is_empty()
    }
}

fn check_ell(p: &CodeParams, ell: usize, ell_prime: usize) -> Result<(), PmError> {
    if ell >= p.k {
        return Err(ParamsError::InvalidParams(format!("ell={ell} must be < k={}", p.k)).into());
    }
    if ell_prime > ell {
        return Err(ParamsError::InvalidParams(format!(
            "ell_prime={ell_prime} must be <= ell={ell}"
        ))
        .into());
    }
    Ok(())
}

/// MBR random slots: every canonical slot in the first ell rows (and by
/// symmetry the first ell columns) of the d x d message matrix. Exactly
/// ell*d - C(ell,2) slots.
pub fn mbr_placement(p: &CodeParams, ell: usize) -> Result<PlacementMap, PmError> {
    let unit = unit_params(p);
    assert_eq!(unit.mode, CodeMode::Mbr, "MBR placement on MSR params");
    check_ell(&unit, ell, 0)?;
    let random_slots = canonical_slots(&unit)
        .into_iter()
        .filter(|&(r, _)| r < ell)
        .collect();
    Ok(PlacementMap { random_slots })
}

/// MSR random slots, three disjoint groups:
/// 1. the first ell rows of S1 (ell*alpha - C(ell,2) slots),
/// 2. the upper-triangle slots in the first (ell-1) x (ell-1) corner of S2
///    (C(ell,2) slots),
/// 3. the remaining slots in the first ell_prime rows of S2
///    ((k-ell)*ell_prime slots).
///
/// Total ell*alpha + (k-ell)*ell_prime.
pub fn msr_placement(
    p: &CodeParams,
    ell: usize,
    ell_prime: usize,
) -> Result<PlacementMap, PmError> {
    let unit = unit_params(p);
    assert_eq!(unit.mode, CodeMode::Msr, "MSR placement on MBR params");
    check_ell(&unit, ell, ell_prime)?;
    let a = unit.alpha;
    let random_slots = canonical_slots(&unit)
        .into_iter()
        .filter(|&(r, c)| {
            if r < a {
                r < ell // group 1, inside S1
            } else {
                // inside S2 at block row r - a, col c (canonical: row <= col)
                let corner = c + 1 < ell; // both indices < ell - 1
                let first_rows = r - a < ell_prime;
                corner || first_rows
            }
        })
        .collect();
    Ok(PlacementMap { random_slots })
}

/// Placement for either mode.
pub fn placement(p: &CodeParams, sec: &SecrecyParams) -> Result<PlacementMap, PmError> {
    match p.mode {
        CodeMode::Mbr => mbr_placement(p, sec.ell),
        CodeMode::Msr => msr_placement(p, sec.ell, sec.ell_prime),
    }
}

/// Packs b_s message symbols plus freshly drawn randoms into a message
/// matrix: placement slots take the randoms (in canonical order), the rest
/// take the message symbols (in canonical order).
pub fn secure_pack(
    p: &CodeParams,
    sec: &SecrecyParams,
    message: &[FieldElement],
    q: FieldModulus,
    randomness: &mut dyn RandomnessSource,
) -> Result<MessageMatrix, PmError> {
    let unit = unit_params(p);
    let map = placement(&unit, sec)?;
    if message.len() != unit.b - map.len() {
        return Err(PmError::LengthMismatch {
            expected: unit.b - map.len(),
            got: message.len(),
        });
    }
    let mut values = Vec::with_capacity(unit.b);
    let mut roles = Vec::with_capacity(unit.b);
    let mut msg_iter = message.iter();
    for slot in canonical_slots(&unit) {
        if map.random_slots.contains(&slot) {
            values.push(uniform_sample(randomness, q)?);
            roles.push(SymbolRole::Random);
        } else {
            values.push(*msg_iter.next().expect("message length checked"));
            roles.push(SymbolRole::Message);
        }
    }
    MessageMatrix::from_slot_values(&unit, q, &values, roles)
}

/// A ready-to-use {ell, ell_prime}-secure code instance (ell = 0 gives the
/// plain code). Minimum-storage parameters with d > 2k-2 are realized by a
/// chain of single shortening steps over a native parent.
#[derive(Debug, Clone)]
pub struct SecureCode {
    params: CodeParams, // beta = 1
    secrecy: SecrecyParams,
    modulus: FieldModulus,
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Native {
        enc: EncodingMatrix,
        map: PlacementMap,
        /// input index -> canonical slot index it feeds
        input_slot: Vec<usize>,
    },
    Shortened {
        parent: Box<SecureCode>,
        /// parent-input x own-input matrix; own inputs embed as
        /// t_parent = embed * t_own, which pins the virtual node's share to
        /// zero for every own input.
        embed: MatrixFq,
        /// the parent node whose share is identically zero (always the
        /// highest-indexed one)
        virtual_id: usize,
    },
}

impl SecureCode {
    /// Builds the instance on the default point sequence for this field.
    pub fn new(
        p: &CodeParams,
        ell: usize,
        ell_prime: usize,
        q: FieldModulus,
    ) -> Result<Self, PmError> {
        Self::new_inner(p, ell, ell_prime, q, None)
    }

    /// Builds on explicit base evaluation points (n + shortening-steps of
    /// them), as stored in an on-disk layout.
    pub fn new_on_points(
        p: &CodeParams,
        ell: usize,
        ell_prime: usize,
        q: FieldModulus,
        points: Vec<FieldElement>,
    ) -> Result<Self, PmError> {
        Self::new_inner(p, ell, ell_prime, q, Some(points))
    }

    fn new_inner(
        p: &CodeParams,
        ell: usize,
        ell_prime: usize,
        q: FieldModulus,
        points: Option<Vec<FieldElement>>,
    ) -> Result<Self, PmError> {
        let unit = unit_params(p);
        check_ell(&unit, ell, ell_prime)?;
        let native = match unit.mode {
            CodeMode::Mbr => true,
            CodeMode::Msr => unit.d == 2 * unit.k - 2,
        };
        if native {
            let secrecy = secure_counts_allow_degenerate(&unit, ell, ell_prime)?;
            let enc = match points {
                Some(pts) => EncodingMatrix::build_on_points(&unit, q, pts)?,
                None => EncodingMatrix::build(&unit, q)?,
            };
            let map = placement(&unit, &secrecy)?;
            debug_assert_eq!(map.len(), secrecy.r);
            let input_slot = input_slot_map(&unit, &map);
            Ok(SecureCode {
                params: unit,
                secrecy,
                modulus: q,
                inner: Inner::Native {
                    enc,
                    map,
                    input_slot,
                },
            })
        } else {
            let parent_params = msr_params(unit.n + 1, unit.k + 1, unit.d + 1, 1)?;
            let parent = Self::new_inner(&parent_params, ell + 1, ell_prime, q, points)?;
            shorten_msr(parent)
        }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn secrecy(&self) -> &SecrecyParams {
        &self.secrecy
    }

    pub fn modulus(&self) -> FieldModulus {
        self.modulus
    }

    /// Message plus random symbol count; the dimension of the input vector.
    pub fn input_len(&self) -> usize {
        self.secrecy.b_s + self.secrecy.r
    }

    /// Number of shortening steps between this instance and its native base.
    pub fn shortening_depth(&self) -> usize {
        match &self.inner {
            Inner::Native { .. } => 0,
            Inner::Shortened { parent, .. } => 1 + parent.shortening_depth(),
        }
    }

    /// The native instance at the bottom of the shortening chain (self when
    /// not shortened).
    pub fn base(&self) -> &SecureCode {
        match &self.inner {
            Inner::Native { .. } => self,
            Inner::Shortened { parent, .. } => parent.base(),
        }
    }

    /// Encoding rows of the native base code.
    pub fn base_encoding(&self) -> &EncodingMatrix {
        match &self.base().inner {
            Inner::Native { enc, .. } => enc,
            Inner::Shortened { .. } => unreachable!("base is native"),
        }
    }

    /// Random-slot placement of the native base code.
    pub fn base_placement(&self) -> &PlacementMap {
        match &self.base().inner {
            Inner::Native { map, .. } => map,
            Inner::Shortened { .. } => unreachable!("base is native"),
        }
    }

    fn check_node(&self, node: usize) -> Result<(), PmError> {
        if node == 0 || node > self.params.n {
            return Err(PmError::InvalidNode(node, self.params.n));
        }
        Ok(())
    }

    /// Encodes b_s message symbols, drawing the r random symbols from the
    /// source, into all n node shares.
    pub fn encode(
        &self,
        message: &[FieldElement],
        randomness: &mut dyn RandomnessSource,
    ) -> Result<Vec<NodeShare>, PmError> {
        if message.len() != self.secrecy.b_s {
            return Err(PmError::LengthMismatch {
                expected: self.secrecy.b_s,
                got: message.len(),
            });
        }
        for v in message {
            if v.modulus() != self.modulus {
                return Err(crate::gf::GfError::ModulusMismatch(
                    self.modulus.value(),
                    v.modulus().value(),
                )
                .into());
            }
        }
        let mut input = message.to_vec();
        for _ in 0..self.secrecy.r {
            input.push(uniform_sample(randomness, self.modulus)?);
        }
        self.encode_input(&input)
    }

    /// Encodes a fully explicit input vector [message | randoms].
    pub fn encode_input(&self, input: &[FieldElement]) -> Result<Vec<NodeShare>, PmError> {
        if input.len() != self.input_len() {
            return Err(PmError::LengthMismatch {
                expected: self.input_len(),
                got: input.len(),
            });
        }
        match &self.inner {
            Inner::Native {
                enc,
                map: _,
                input_slot,
            } => {
                let values = self.slot_values_from_input(input, input_slot);
                let roles = self.native_roles();
                let m = MessageMatrix::from_slot_values(&self.params, self.modulus, &values, roles)?;
                pm_codes::encode(enc, &m)
            }
            Inner::Shortened { parent, embed, .. } => {
                let t_parent = apply(embed, input);
                let mut shares = parent.encode_input(&t_parent)?;
                let virt = shares.pop().expect("parent has n+1 shares");
                debug_assert!(virt.symbols.iter().all(|e| e.is_zero()));
                Ok(shares)
            }
        }
    }

    fn native_roles(&self) -> Vec<SymbolRole> {
        match &self.inner {
            Inner::Native { map, .. } => canonical_slots(&self.params)
                .iter()
                .map(|slot| {
                    if map.random_slots.contains(slot) {
                        SymbolRole::Random
                    } else {
                        SymbolRole::Message
                    }
                })
                .collect(),
            Inner::Shortened { .. } => unreachable!("roles only exist on native instances"),
        }
    }

    fn slot_values_from_input(
        &self,
        input: &[FieldElement],
        input_slot: &[usize],
    ) -> Vec<FieldElement> {
        let mut values = vec![self.modulus.zero(); input_slot.len()];
        for (t, &s) in input_slot.iter().enumerate() {
            values[s] = input[t];
        }
        values
    }

    /// Recovers the b_s message symbols from any k distinct shares.
    pub fn reconstruct(&self, shares: &[&NodeShare]) -> Result<Vec<FieldElement>, PmError> {
        Ok(self.reconstruct_input(shares)?[..self.secrecy.b_s].to_vec())
    }

    /// Recovers the full input vector [message | randoms] from any k shares.
    /// For shortened instances the randoms are the own (non-absorbed) ones.
    pub fn reconstruct_input(&self, shares: &[&NodeShare]) -> Result<Vec<FieldElement>, PmError> {
        for s in shares {
            self.check_node(s.node_id)?;
        }
        match &self.inner {
            Inner::Native { enc, input_slot, .. } => {
                let values = pm_codes::reconstruct(enc, shares)?;
                Ok(input_slot.iter().map(|&s| values[s]).collect())
            }
            Inner::Shortened {
                parent, virtual_id, ..
            } => {
                if shares.len() != self.params.k {
                    return Err(PmError::NotEnoughShares {
                        expected: self.params.k,
                        got: shares.len(),
                    });
                }
                let zero_share = NodeShare {
                    node_id: *virtual_id,
                    symbols: vec![self.modulus.zero(); self.params.alpha],
                };
                let mut full: Vec<&NodeShare> = shares.to_vec();
                full.push(&zero_share);
                let t_parent = parent.reconstruct_input(&full)?;
                // Own inputs are the parent inputs at the non-absorbed
                // positions; reading them back through the embed structure:
                // message symbols are shared verbatim and own randoms are the
                // parent's free randoms in order.
                let own = self.own_input_positions();
                Ok(own.iter().map(|&j| t_parent[j]).collect())
            }
        }
    }

    /// Parent-input positions that carry this instance's own inputs verbatim
    /// (only meaningful one level up a shortened instance).
    fn own_input_positions(&self) -> Vec<usize> {
        match &self.inner {
            Inner::Native { .. } => (0..self.input_len()).collect(),
            Inner::Shortened { embed, .. } => {
                // Columns of the embed are own inputs; each has exactly one
                // parent row where it appears as a bare 1 on a one-hot row.
                let mut positions = Vec::with_capacity(embed.cols());
                for c in 0..embed.cols() {
                    let row = (0..embed.rows())
                        .find(|&r| {
                            embed.get(r, c).value() == 1
                                && (0..embed.cols()).all(|cc| cc == c || embed.get(r, cc).is_zero())
                        })
                        .expect("every own input has a one-hot parent row");
                    positions.push(row);
                }
                positions
            }
        }
    }

    /// One helper's repair contribution for a failed node.
    pub fn repair_symbol(
        &self,
        helper: &NodeShare,
        failed_id: usize,
    ) -> Result<RepairSymbol, PmError> {
        self.check_node(failed_id)?;
        self.check_node(helper.node_id)?;
        match &self.inner {
            Inner::Native { enc, .. } => pm_codes::repair_symbol(enc, helper, failed_id),
            Inner::Shortened { parent, .. } => parent.repair_symbol(helper, failed_id),
        }
    }

    /// Rebuilds a failed node's share from d distinct helper symbols.
    pub fn repair(
        &self,
        symbols: &[RepairSymbol],
        failed_id: usize,
    ) -> Result<NodeShare, PmError> {
        self.check_node(failed_id)?;
        if symbols.len() != self.params.d {
            return Err(PmError::NotEnoughHelpers {
                expected: self.params.d,
                got: symbols.len(),
            });
        }
        for s in symbols {
            self.check_node(s.helper_id)?;
        }
        match &self.inner {
            Inner::Native { enc, .. } => pm_codes::repair(enc, symbols, failed_id),
            Inner::Shortened {
                parent, virtual_id, ..
            } => {
                // The virtual node's share is zero, so its contribution to
                // any repair is the zero symbol; append it and let the parent
                // solve the full system.
                let mut full = symbols.to_vec();
                full.push(RepairSymbol {
                    helper_id: *virtual_id,
                    failed_id,
                    value: self.modulus.zero(),
                });
                parent.repair(&full, failed_id)
            }
        }
    }

    /// Coefficients of a node's alpha stored symbols over the input vector
    /// [message | randoms]: an alpha x input_len matrix.
    pub fn share_matrix(&self, node: usize) -> Result<MatrixFq, PmError> {
        self.check_node(node)?;
        match &self.inner {
            Inner::Native { enc, input_slot, .. } => {
                let mut out = MatrixFq::zero(self.params.alpha, self.input_len(), self.modulus);
                let psi = MatrixFq::from_rows(vec![enc.psi_row(node)?.to_vec()], self.modulus)?;
                for (t, &s) in input_slot.iter().enumerate() {
                    let basis = self.basis_matrix(s)?;
                    let row = psi.matmul(basis.matrix())?;
                    for j in 0..self.params.alpha {
                        out.set(j, t, row.get(0, j));
                    }
                }
                Ok(out)
            }
            Inner::Shortened { parent, embed, .. } => {
                Ok(parent.share_matrix(node)?.matmul(embed)?)
            }
        }
    }

    /// Coefficients of the canonical repair view of a node over the input
    /// vector. The view is the full column M v_f (v_f the node's repair
    /// vector), which is what the downloaded repair symbols determine and is
    /// independent of which helpers serve the repair.
    pub fn repair_view_matrix(&self, node: usize) -> Result<MatrixFq, PmError> {
        self.check_node(node)?;
        match &self.inner {
            Inner::Native { enc, input_slot, .. } => {
                let v = enc.repair_vector(node)?;
                let v_col = MatrixFq::from_rows(v.iter().map(|&e| vec![e]).collect(), self.modulus)?;
                let rows = match self.params.mode {
                    CodeMode::Mbr => self.params.d,
                    CodeMode::Msr => 2 * self.params.alpha,
                };
                let mut out = MatrixFq::zero(rows, self.input_len(), self.modulus);
                for (t, &s) in input_slot.iter().enumerate() {
                    let basis = self.basis_matrix(s)?;
                    let col = basis.matrix().matmul(&v_col)?;
                    for j in 0..rows {
                        out.set(j, t, col.get(j, 0));
                    }
                }
                Ok(out)
            }
            Inner::Shortened { parent, embed, .. } => {
                Ok(parent.repair_view_matrix(node)?.matmul(embed)?)
            }
        }
    }

    /// Message matrix with a single 1 at canonical slot `s` (and its mirror).
    fn basis_matrix(&self, s: usize) -> Result<MessageMatrix, PmError> {
        let mut values = vec![self.modulus.zero(); self.params.b];
        values[s] = self.modulus.one();
        MessageMatrix::from_slot_values(
            &self.params,
            self.modulus,
            &values,
            vec![SymbolRole::Message; self.params.b],
        )
    }
}

/// input index -> canonical slot index: message inputs feed the non-random
/// slots in canonical order, random inputs the placement slots in order.
fn input_slot_map(unit: &CodeParams, map: &PlacementMap) -> Vec<usize> {
    let slots = canonical_slots(unit);
    let mut message_slots = Vec::new();
    let mut random_slots = Vec::new();
    for (idx, slot) in slots.iter().enumerate() {
        if map.random_slots.contains(slot) {
            random_slots.push(idx);
        } else {
            message_slots.push(idx);
        }
    }
    message_slots.extend(random_slots);
    message_slots
}

fn apply(m: &MatrixFq, v: &[FieldElement]) -> Vec<FieldElement> {
    (0..m.rows())
        .map(|r| crate::linalg::dot(m.row(r), v))
        .collect()
}

/// One shortening step: from a secure minimum-storage parent with parameters
/// [n+1, k+1, d+1, ell+1, ell_prime] to [n, k, d, ell, ell_prime].
///
/// The highest-indexed parent node becomes virtual: its share is pinned to
/// the all-zero vector by turning alpha parent random symbols into linear
/// functions of the remaining inputs. The absorbed randoms are the greedily
/// chosen lexicographically-first parent random inputs whose constraint
/// columns are invertible; the parent's single-node secrecy guarantees such a
/// choice exists.
pub fn shorten_msr(parent: SecureCode) -> Result<SecureCode, PmError> {
    let pp = *parent.params();
    let ps = *parent.secrecy();
    if pp.mode != CodeMode::Msr {
        return Err(ParamsError::UnsupportedRegime(
            "only minimum-storage codes shorten".into(),
        )
        .into());
    }
    if ps.ell == 0 {
        return Err(ParamsError::InvalidParams(
            "shortening consumes one eavesdropped-node level; parent needs ell >= 1".into(),
        )
        .into());
    }
    let child_params = msr_params(pp.n - 1, pp.k - 1, pp.d - 1, 1)?;
    let child_secrecy = secure_counts_allow_degenerate(&child_params, ps.ell - 1, ps.ell_prime)?;
    let q = parent.modulus();
    let alpha = pp.alpha;
    let virtual_id = pp.n;

    let sv = parent.share_matrix(virtual_id)?;
    let parent_inputs = parent.input_len();
    // Greedy lexicographic scan over the parent's random inputs for alpha
    // independent constraint columns.
    let random_range: Vec<usize> = (ps.b_s..parent_inputs).collect();
    let mut absorbed: Vec<usize> = Vec::with_capacity(alpha);
    for &j in &random_range {
        if absorbed.len() == alpha {
            break;
        }
        let mut trial = absorbed.clone();
        trial.push(j);
        let sub = sv.submatrix(&(0..alpha).collect::<Vec<_>>(), &trial);
        if sub.rank() == trial.len() {
            absorbed = trial;
        }
    }
    if absorbed.len() != alpha {
        return Err(PmError::PointSelectionFailed {
            q: q.value(),
            power: alpha,
            needed: alpha,
            found: absorbed.len(),
        });
    }
    let free: Vec<usize> = (0..parent_inputs).filter(|j| !absorbed.contains(j)).collect();
    debug_assert_eq!(free.len(), child_secrecy.b_s + child_secrecy.r);

    // Constraint S_v * t_parent = 0 splits as S_A a + S_F f = 0, so the
    // absorbed randoms are a = -(S_A^-1 S_F) f.
    let all_out: Vec<usize> = (0..alpha).collect();
    let s_a = sv.submatrix(&all_out, &absorbed);
    let s_f = sv.submatrix(&all_out, &free);
    let a_of_f = s_a.invert()?.matmul(&s_f)?.scale(q.zero() - q.one());

    let child_inputs = free.len();
    let mut embed = MatrixFq::zero(parent_inputs, child_inputs, q);
    for (c, &j) in free.iter().enumerate() {
        embed.set(j, c, q.one());
    }
    for (r, &j) in absorbed.iter().enumerate() {
        for c in 0..child_inputs {
            embed.set(j, c, a_of_f.get(r, c));
        }
    }
    debug_assert_eq!(
        sv.matmul(&embed).unwrap(),
        MatrixFq::zero(alpha, child_inputs, q),
        "virtual node share must vanish on the embedded input space"
    );

    Ok(SecureCode {
        params: child_params,
        secrecy: child_secrecy,
        modulus: q,
        inner: Inner::Shortened {
            parent: Box::new(parent),
            embed,
            virtual_id,
        },
    })
}
