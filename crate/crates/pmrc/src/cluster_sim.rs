//! Discrete-event storage-cluster simulation.
//!
//! Drives a coded cluster through failures, repairs, and data collections
//! while three ledgers watch: node state, exact repair/collect traffic, and
//! an eavesdropper who taps a fixed set of nodes. The adversary accumulates
//! coefficient rows for everything seen on the wire, so its knowledge is an
//! [`ObservationSystem`] whose rank (and leakage) can be queried after every
//! event. Scenarios come from a small line-oriented script language.

use crate::gf::FieldElement;
use crate::pm_codes::{NodeShare, PmError, RepairSymbol};
use crate::secrecy_audit::{leakage, AuditError, EavesdropperSpec, ObservationSystem};
use crate::secure::SecureCode;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid node id {0}")]
    InvalidNode(usize),
    #[error("node {0} is already failed")]
    AlreadyFailed(usize),
    #[error("cannot repair node {node}: {reason}")]
    RepairImpossible { node: usize, reason: String },
    #[error("cannot collect from {nodes:?}: {reason}")]
    CollectImpossible { nodes: Vec<usize>, reason: String },
    #[error("script line {line}: {msg}")]
    ScriptError { line: usize, msg: String },
    #[error(transparent)]
    Pm(#[from] PmError),
    #[error(transparent)]
    Audit(#[from] AuditError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Healthy,
    Failed,
}

/// How a repair picks its d helpers among the healthy nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairPolicy {
    /// The d healthy nodes with smallest ids (default).
    LowestId,
    /// d healthy nodes drawn from the simulation's seeded generator.
    Random,
    /// Prefers helpers outside the adversary's tapped set, falling back to
    /// tapped ones only when needed.
    AdversaryAvoiding,
}

impl std::str::FromStr for RepairPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lowest-id" => Ok(RepairPolicy::LowestId),
            "random" => Ok(RepairPolicy::Random),
            "adversary-avoiding" => Ok(RepairPolicy::AdversaryAvoiding),
            other => Err(format!("unknown repair policy `{other}`")),
        }
    }
}

impl std::fmt::Display for RepairPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RepairPolicy::LowestId => "lowest-id",
            RepairPolicy::Random => "random",
            RepairPolicy::AdversaryAvoiding => "adversary-avoiding",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficKind {
    Repair,
    Collect,
}

/// One bandwidth-bearing event: symbols moved over the wire at a clock tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficEvent {
    pub clock: u64,
    pub kind: TrafficKind,
    pub target: usize,
    pub sources: Vec<usize>,
    pub symbols: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrafficLog {
    pub events: Vec<TrafficEvent>,
    pub repair_symbols: u64,
    pub collect_symbols: u64,
}

/// Node statuses and currently stored shares.
#[derive(Debug, Clone)]
pub struct ClusterState {
    statuses: Vec<NodeStatus>,
    shares: Vec<Option<NodeShare>>,
    clock: u64,
}

impl ClusterState {
    pub fn status(&self, node: usize) -> Option<NodeStatus> {
        self.statuses.get(node.wrapping_sub(1)).copied()
    }

    pub fn share(&self, node: usize) -> Option<&NodeShare> {
        self.shares.get(node.wrapping_sub(1)).and_then(|s| s.as_ref())
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn healthy_nodes(&self) -> Vec<usize> {
        self.statuses
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == NodeStatus::Healthy)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

/// Append-only record of everything the eavesdropper has seen, as
/// coefficient rows over the code's input vector.
#[derive(Debug, Clone)]
pub struct AdversaryState {
    spec: EavesdropperSpec,
    sys: ObservationSystem,
}

impl AdversaryState {
    /// Taps the spec's storage nodes: their stored shares are visible from
    /// the start.
    pub fn new(code: &SecureCode, spec: EavesdropperSpec) -> Result<Self, SimError> {
        let mut sys = ObservationSystem::empty(code);
        for &node in spec.storage_nodes() {
            sys.append(&code.share_matrix(node)?)?;
        }
        Ok(AdversaryState { spec, sys })
    }

    pub fn spec(&self) -> &EavesdropperSpec {
        &self.spec
    }

    pub fn observed_rows(&self) -> usize {
        self.sys.rows()
    }

    pub fn joint_rank(&self) -> usize {
        self.sys.joint_rank()
    }

    pub fn leakage(&self) -> usize {
        leakage(&self.sys)
    }

    pub fn system(&self) -> &ObservationSystem {
        &self.sys
    }

    /// Records the raw wire symbols of one repair of a tapped node: one row
    /// per helper, each a combination of the node's canonical repair-view
    /// rows weighted by that helper's encoding row.
    fn observe_repair(
        &mut self,
        code: &SecureCode,
        failed: usize,
        helpers: &[usize],
    ) -> Result<(), SimError> {
        if !self.spec.repair_nodes().contains(&failed) {
            return Ok(());
        }
        let canon = code.repair_view_matrix(failed)?;
        let zero = code.modulus().zero();
        let mut rows = Vec::with_capacity(helpers.len());
        for &h in helpers {
            let psi = code.base_encoding().psi_row(h)?.to_vec();
            let mut row = vec![zero; canon.cols()];
            for (j, &w) in psi.iter().enumerate() {
                for (c, slot) in row.iter_mut().enumerate() {
                    *slot = *slot + w * canon.get(j, c);
                }
            }
            rows.push(row);
        }
        let block =
            crate::linalg::MatrixFq::from_rows(rows, code.modulus()).map_err(PmError::from)?;
        self.sys.append(&block)?;
        Ok(())
    }
}

/// A live cluster bound to one codeword, with optional adversary and full
/// traffic accounting.
pub struct Simulation<'a> {
    code: &'a SecureCode,
    cluster: ClusterState,
    adversary: Option<AdversaryState>,
    traffic: TrafficLog,
    rng: ChaCha20Rng,
}

impl<'a> Simulation<'a> {
    /// Encodes `input` (message followed by randoms, `input_len` symbols)
    /// onto n healthy nodes.
    pub fn init(
        code: &'a SecureCode,
        input: &[FieldElement],
        adversary_spec: Option<EavesdropperSpec>,
        seed: u64,
    ) -> Result<Self, SimError> {
        let shares = code.encode_input(input)?;
        let n = code.params().n;
        let adversary = match adversary_spec {
            Some(spec) => Some(AdversaryState::new(code, spec)?),
            None => None,
        };
        Ok(Simulation {
            code,
            cluster: ClusterState {
                statuses: vec![NodeStatus::Healthy; n],
                shares: shares.into_iter().map(Some).collect(),
                clock: 0,
            },
            adversary,
            traffic: TrafficLog::default(),
            rng: ChaCha20Rng::seed_from_u64(seed),
        })
    }

    pub fn cluster(&self) -> &ClusterState {
        &self.cluster
    }

    pub fn adversary(&self) -> Option<&AdversaryState> {
        self.adversary.as_ref()
    }

    pub fn traffic(&self) -> &TrafficLog {
        &self.traffic
    }

    fn check_node(&self, node: usize) -> Result<(), SimError> {
        if node == 0 || node > self.code.params().n {
            return Err(SimError::InvalidNode(node));
        }
        Ok(())
    }

    pub fn fail(&mut self, node: usize) -> Result<(), SimError> {
        self.check_node(node)?;
        if self.cluster.statuses[node - 1] == NodeStatus::Failed {
            return Err(SimError::AlreadyFailed(node));
        }
        self.cluster.statuses[node - 1] = NodeStatus::Failed;
        self.cluster.shares[node - 1] = None;
        self.cluster.clock += 1;
        Ok(())
    }

    fn pick_helpers(&mut self, node: usize, policy: RepairPolicy) -> Result<Vec<usize>, SimError> {
        let d = self.code.params().d;
        let candidates: Vec<usize> = self
            .cluster
            .healthy_nodes()
            .into_iter()
            .filter(|&h| h != node)
            .collect();
        if candidates.len() < d {
            return Err(SimError::RepairImpossible {
                node,
                reason: format!("{} healthy helpers, need {d}", candidates.len()),
            });
        }
        Ok(match policy {
            RepairPolicy::LowestId => candidates[..d].to_vec(),
            RepairPolicy::Random => candidates
                .choose_multiple(&mut self.rng, d)
                .copied()
                .collect(),
            RepairPolicy::AdversaryAvoiding => {
                let tapped: &[usize] = self
                    .adversary
                    .as_ref()
                    .map_or(&[], |a| a.spec.storage_nodes());
                let mut team: Vec<usize> = candidates
                    .iter()
                    .copied()
                    .filter(|h| !tapped.contains(h))
                    .collect();
                team.extend(candidates.iter().copied().filter(|h| tapped.contains(h)));
                team.truncate(d);
                team
            }
        })
    }

    /// Repairs a failed node from d helpers chosen by `policy`, moving d
    /// beta symbols over the wire.
    pub fn repair(&mut self, node: usize, policy: RepairPolicy) -> Result<(), SimError> {
        self.check_node(node)?;
        if self.cluster.statuses[node - 1] == NodeStatus::Healthy {
            return Err(SimError::RepairImpossible {
                node,
                reason: "node is healthy".into(),
            });
        }
        let team = self.pick_helpers(node, policy)?;
        let mut symbols: Vec<RepairSymbol> = Vec::with_capacity(team.len());
        for &h in &team {
            let share = self.cluster.shares[h - 1]
                .as_ref()
                .expect("healthy node has a share");
            symbols.push(self.code.repair_symbol(share, node)?);
        }
        let rebuilt = self.code.repair(&symbols, node)?;
        self.cluster.shares[node - 1] = Some(rebuilt);
        self.cluster.statuses[node - 1] = NodeStatus::Healthy;
        self.cluster.clock += 1;
        let moved = (team.len() * self.code.params().beta) as u64;
        self.traffic.repair_symbols += moved;
        self.traffic.events.push(TrafficEvent {
            clock: self.cluster.clock,
            kind: TrafficKind::Repair,
            target: node,
            sources: team.clone(),
            symbols: moved,
        });
        if let Some(adv) = self.adversary.as_mut() {
            adv.observe_repair(self.code, node, &team)?;
        }
        Ok(())
    }

    /// Reads k healthy nodes and decodes the stored message, moving k alpha
    /// symbols over the wire.
    pub fn collect(&mut self, nodes: &[usize]) -> Result<Vec<FieldElement>, SimError> {
        let k = self.code.params().k;
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k || sorted.len() != nodes.len() {
            return Err(SimError::CollectImpossible {
                nodes: nodes.to_vec(),
                reason: format!("need exactly k = {k} distinct nodes"),
            });
        }
        for &node in &sorted {
            self.check_node(node).map_err(|_| SimError::CollectImpossible {
                nodes: nodes.to_vec(),
                reason: format!("node {node} out of range"),
            })?;
            if self.cluster.statuses[node - 1] == NodeStatus::Failed {
                return Err(SimError::CollectImpossible {
                    nodes: nodes.to_vec(),
                    reason: format!("node {node} is failed"),
                });
            }
        }
        let shares: Vec<&NodeShare> = sorted
            .iter()
            .map(|&id| self.cluster.shares[id - 1].as_ref().unwrap())
            .collect();
        let message = self.code.reconstruct(&shares)?;
        self.cluster.clock += 1;
        let moved = (k * self.code.params().alpha) as u64;
        self.traffic.collect_symbols += moved;
        self.traffic.events.push(TrafficEvent {
            clock: self.cluster.clock,
            kind: TrafficKind::Collect,
            target: 0,
            sources: sorted,
            symbols: moved,
        });
        Ok(message)
    }
}

/// One parsed scenario command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Fail(usize),
    Repair(usize, Option<RepairPolicy>),
    Collect(Vec<usize>),
}

/// Parses the scenario script language: one command per line, `#` comments.
///
/// ```text
/// FAIL <node>
/// REPAIR <node> [POLICY <lowest-id|random|adversary-avoiding>]
/// COLLECT <n1,n2,...,nk>
/// ```
pub fn parse_script(text: &str) -> Result<Vec<(usize, Command)>, SimError> {
    let mut commands = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| SimError::ScriptError { line: line_no, msg };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let parse_node = |tok: &str| {
            tok.parse::<usize>()
                .map_err(|_| err(format!("expected a node id, got `{tok}`")))
        };
        let command = match tokens[0].to_ascii_uppercase().as_str() {
            "FAIL" => {
                if tokens.len() != 2 {
                    return Err(err("usage: FAIL <node>".into()));
                }
                Command::Fail(parse_node(tokens[1])?)
            }
            "REPAIR" => {
                let node = match tokens.get(1) {
                    Some(tok) => parse_node(tok)?,
                    None => return Err(err("usage: REPAIR <node> [POLICY <name>]".into())),
                };
                let policy = match tokens.len() {
                    2 => None,
                    4 if tokens[2].eq_ignore_ascii_case("POLICY") => {
                        Some(tokens[3].parse::<RepairPolicy>().map_err(err)?)
                    }
                    _ => return Err(err("usage: REPAIR <node> [POLICY <name>]".into())),
                };
                Command::Repair(node, policy)
            }
            "COLLECT" => {
                if tokens.len() < 2 {
                    return Err(err("usage: COLLECT <n1,n2,...>".into()));
                }
                let joined = tokens[1..].join("");
                let mut nodes = Vec::new();
                for part in joined.split(',') {
                    if part.is_empty() {
                        return Err(err("empty entry in node list".into()));
                    }
                    nodes.push(parse_node(part)?);
                }
                Command::Collect(nodes)
            }
            other => return Err(err(format!("unknown command `{other}`"))),
        };
        commands.push((line_no, command));
    }
    Ok(commands)
}

/// What one executed scenario step did, with the adversary's standing
/// afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub line: usize,
    pub description: String,
    pub adversary_rank: Option<usize>,
    pub adversary_leakage: Option<usize>,
}

/// Everything a finished scenario run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub steps: Vec<StepRecord>,
    pub collected: Vec<Vec<u64>>,
    pub repair_symbols: u64,
    pub collect_symbols: u64,
    pub final_leakage: Option<usize>,
    pub adversary_rows: usize,
    /// Whether the adversary stays inside the design budget (at most ell
    /// storage taps, ell_prime repair taps); leakage beyond it is expected.
    pub within_design: Option<bool>,
}

/// Runs a parsed or textual scenario start to finish.
pub fn run_scenario(
    code: &SecureCode,
    input: &[FieldElement],
    script: &str,
    adversary_spec: Option<EavesdropperSpec>,
    seed: u64,
    default_policy: RepairPolicy,
) -> Result<ScenarioReport, SimError> {
    let commands = parse_script(script)?;
    let within_design = adversary_spec.as_ref().map(|spec| {
        spec.storage_nodes().len() <= code.secrecy().ell
            && spec.repair_nodes().len() <= code.secrecy().ell_prime
    });
    let mut sim = Simulation::init(code, input, adversary_spec, seed)?;
    let mut steps = Vec::new();
    let mut collected = Vec::new();
    for (line, command) in commands {
        let description = match &command {
            Command::Fail(node) => {
                sim.fail(*node)?;
                format!("fail node {node}")
            }
            Command::Repair(node, policy) => {
                let policy = policy.unwrap_or(default_policy);
                sim.repair(*node, policy)?;
                let event = sim.traffic.events.last().unwrap();
                format!(
                    "repair node {node} via {:?} ({} symbols, policy {policy})",
                    event.sources, event.symbols
                )
            }
            Command::Collect(nodes) => {
                let message = sim.collect(nodes)?;
                collected.push(message.iter().map(|e| e.value()).collect());
                format!("collect from {nodes:?}")
            }
        };
        steps.push(StepRecord {
            line,
            description,
            adversary_rank: sim.adversary().map(|a| a.joint_rank()),
            adversary_leakage: sim.adversary().map(|a| a.leakage()),
        });
    }
    Ok(ScenarioReport {
        steps,
        collected,
        repair_symbols: sim.traffic.repair_symbols,
        collect_symbols: sim.traffic.collect_symbols,
        final_leakage: sim.adversary().map(|a| a.leakage()),
        adversary_rows: sim.adversary().map_or(0, |a| a.observed_rows()),
        within_design,
    })
}
