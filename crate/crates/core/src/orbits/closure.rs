//! Bounded search for tame equivalences.
//!
//! Every map is kept in left-normalized form `α⁻¹ ∘ F` (`α` the affine part
//! of `F`), which absorbs left composition with `Aff_n`. From each state
//! the search applies elementary maps on both sides and the affine
//! generators (transvections, scalings, translations) on the right,
//! dropping results above the degree cap. All sources (targets and seeds)
//! are searched together in layers; two sources are merged when their
//! searches reach a common state, which is an explicit equivalence.

use std::collections::HashMap;
use std::fmt;

use super::sparse::{mono_degree, mono_from_exps, unit, Binomials, SMap};
use super::UnionFind;
use crate::ff::{Elem, FieldCtx};
use crate::mpoly::PolyRing;
use crate::par::*;
use crate::polymap::{DetClass, MapError, PolyMap};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClosureError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("maps {a} and {b} were joined but their invariants differ")]
    InvariantConflict { a: usize, b: usize },
    #[error("invalid closure parameters: {0}")]
    Params(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureParams {
    /// Largest monomial degree in the elementary moves.
    pub gen_degree: u32,
    /// Largest degree of any state kept.
    pub d_max: u32,
    /// Search depth from each target.
    pub target_depth: u32,
    /// Search depth from each seed.
    pub seed_depth: u32,
    /// Maximum number of stored states.
    pub budget: usize,
    /// Extension degrees checked for the bijection signature.
    pub sig_rmax: u32,
    /// Sources per unseeded class in later stages.
    pub probes: usize,
}

impl Default for ClosureParams {
    fn default() -> Self {
        Self { gen_degree: 2, d_max: 4, target_depth: 2, seed_depth: 2, budget: 2_000_000, sig_rmax: 1, probes: 1 }
    }
}

/// Invariants of tame equivalence; a difference proves two maps are not
/// equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Invariants {
    pub automorphism: bool,
    /// Bit `r - 1` set iff bijective over `F_{q^r}`.
    pub signature: u32,
    /// Whether the Jacobian determinant is a nonzero constant.
    pub det: DetClassKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetClassKind {
    Constant,
    NowhereZero,
    Vanishes,
}

impl From<DetClass> for DetClassKind {
    fn from(d: DetClass) -> Self {
        match d {
            DetClass::ConstantNonzero(_) => DetClassKind::Constant,
            DetClass::NowhereZeroNonconstant => DetClassKind::NowhereZero,
            DetClass::VanishesSomewhere => DetClassKind::Vanishes,
        }
    }
}

impl Invariants {
    pub fn of(map: &PolyMap, sig_rmax: u32) -> Result<Self, MapError> {
        let signature = if map.field().is_prime_field() {
            map.extension_signature(sig_rmax)?
        } else {
            u32::from(map.is_bijection(1)?)
        };
        Ok(Self { automorphism: map.is_automorphism()?, signature, det: map.det_classify()?.into() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveSide {
    Left,
    Right,
}

/// A generator applied to a state: `x_i ↦ x_i + c·m` on either side, or
/// `x_i ↦ c·x_i` on the right. Right moves of degree at most one change
/// the affine part and are followed by renormalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Shift { side: MoveSide, var: usize, coeff: Elem, mono: u32 },
    Scale { var: usize, coeff: Elem },
}

impl Move {
    /// Elementary moves on both sides plus affine generators
    /// (transvections, scalings, translations) on the right.
    pub fn standard(field: &FieldCtx, n: usize, gen_degree: u32) -> Vec<Move> {
        let mut out = Vec::new();
        for var in 0..n {
            for j in (0..n).filter(|&j| j != var) {
                for coeff in field.nonzero() {
                    out.push(Move::Shift { side: MoveSide::Right, var, coeff, mono: unit(j) });
                }
            }
            for coeff in field.nonzero().filter(|&c| c != 1) {
                out.push(Move::Scale { var, coeff });
            }
            for coeff in field.nonzero() {
                out.push(Move::Shift { side: MoveSide::Right, var, coeff, mono: 0 });
            }
        }
        let basis = crate::mpoly::MonomialBasis::shared(n, gen_degree.max(1));
        for var in 0..n {
            for g in 2..=gen_degree {
                for k in basis.grade_range(g) {
                    let e = basis.exps(k);
                    if e[var] != 0 {
                        continue;
                    }
                    let mono = mono_from_exps(e);
                    for coeff in field.nonzero() {
                        for side in [MoveSide::Right, MoveSide::Left] {
                            out.push(Move::Shift { side, var, coeff, mono });
                        }
                    }
                }
            }
        }
        out
    }

    fn apply(&self, s: &SMap, d_max: u32, f: &FieldCtx, bin: &Binomials) -> Option<SMap> {
        match *self {
            Move::Shift { side: MoveSide::Right, var, coeff, mono } => {
                let next = s.right_shift(var, coeff, mono, d_max, f, bin)?;
                if mono_degree(mono) <= 1 {
                    next.normalize(f)
                } else {
                    Some(next)
                }
            }
            Move::Shift { side: MoveSide::Left, var, coeff, mono } => s.left_shift(var, coeff, mono, d_max, f),
            Move::Scale { var, coeff } => s.right_scale(var, coeff, f).normalize(f),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub id: usize,
    /// The class's seed if it has one, else its member with the least
    /// encoding.
    pub representative: PolyMap,
    pub seed: Option<usize>,
    /// Target indices, ascending.
    pub members: Vec<usize>,
    pub invariants: Invariants,
    /// Whether every member satisfies the dependence property in
    /// left-normalized form.
    pub dependence: bool,
}

impl ClassInfo {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone)]
pub struct ClassPartition {
    /// Classes containing at least one target, ordered by invariants, then
    /// by representative encoding.
    pub classes: Vec<ClassInfo>,
    /// Class position of each target.
    pub class_of: Vec<usize>,
    /// Seeds with their class position, if they joined a target class.
    pub seed_class: Vec<Option<usize>>,
    /// False when the state budget stopped the search early.
    pub complete: bool,
    pub states: usize,
    pub stages: Vec<ClosureParams>,
}

impl fmt::Display for ClassPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.classes {
            writeln!(f, "{} {} {}", c.id, c.size(), c.representative)?;
        }
        Ok(())
    }
}

impl ClassPartition {
    /// CSV with a header row.
    pub fn to_csv(&self, sig_rmax: u32) -> String {
        let mut s = String::from("class_id,representative,size,is_automorphism");
        for r in 1..=sig_rmax {
            s.push_str(&format!(",signature_r{r}"));
        }
        s.push_str(",det_class,dependence,seed\n");
        for c in &self.classes {
            s.push_str(&format!(
                "{},\"{}\",{},{}",
                c.id,
                c.representative,
                c.size(),
                u8::from(c.invariants.automorphism)
            ));
            for r in 0..sig_rmax {
                s.push_str(&format!(",{}", c.invariants.signature >> r & 1));
            }
            let det = match c.invariants.det {
                DetClassKind::Constant => "constant",
                DetClassKind::NowhereZero => "nowhere-zero",
                DetClassKind::Vanishes => "vanishes",
            };
            let seed = c.seed.map(|s| s.to_string()).unwrap_or_default();
            s.push_str(&format!(",{det},{},{seed}\n", u8::from(c.dependence)));
        }
        s
    }
}

fn normalize(map: &PolyMap) -> Result<PolyMap, MapError> {
    if map.has_identity_affine_part() {
        return Ok(map.clone());
    }
    Ok(map.affine_decompose()?.fprime)
}

/// Searches for tame equivalences among `targets` and `seeds`.
///
/// Returned classes only ever join maps for which an explicit chain of
/// moves was found; maps in different classes are not proven inequivalent
/// unless their invariants differ. Joining two maps with different
/// invariants is reported as an error.
pub fn tame_closure(seeds: &[PolyMap], targets: &[PolyMap], params: &ClosureParams) -> Result<ClassPartition, ClosureError> {
    tame_closure_staged(seeds, targets, std::slice::from_ref(params))
}

/// Runs several searches in turn. The first stage starts from every map;
/// each later stage starts from every seed plus the first `probes` members
/// of each class that has no seed yet.
pub fn tame_closure_staged(
    seeds: &[PolyMap],
    targets: &[PolyMap],
    stages: &[ClosureParams],
) -> Result<ClassPartition, ClosureError> {
    let Some(first) = targets.first().or(seeds.first()) else {
        return Err(ClosureError::Params("no maps given".into()));
    };
    let Some(sig_rmax) = stages.first().map(|p| p.sig_rmax) else {
        return Err(ClosureError::Params("no stages given".into()));
    };
    for p in stages {
        if p.d_max > MAX_STATE_DEGREE {
            return Err(ClosureError::Params(format!("d_max {} exceeds {MAX_STATE_DEGREE}", p.d_max)));
        }
    }
    let field = first.field().clone();
    let n = first.n();
    let ring = PolyRing::new(field.clone(), n);
    let all: Vec<&PolyMap> = targets.iter().chain(seeds).collect();
    let n_targets = targets.len();
    let invariants: Vec<Invariants> =
        all.par_iter().map(|m| Invariants::of(m, sig_rmax)).collect::<Result<_, _>>()?;
    let normalized: Vec<SMap> = all
        .par_iter()
        .map(|m| normalize(m).map(|m| SMap::from_polymap(&m)))
        .collect::<Result<_, _>>()?;
    let dependence: Vec<bool> = targets
        .par_iter()
        .map(|m| normalize(m).and_then(|n| n.satisfies_dependence()).unwrap_or(false))
        .collect();

    let mut uf = UnionFind::new(all.len());
    let mut complete = true;
    let mut states = 0;
    for (k, params) in stages.iter().enumerate() {
        let sources: Vec<usize> = if k == 0 {
            (0..all.len()).collect()
        } else {
            let mut out: Vec<usize> = (n_targets..all.len()).collect();
            for g in uf.groups() {
                if g.iter().all(|&i| i < n_targets) {
                    out.extend(g.iter().take(params.probes.max(1)));
                }
            }
            out.sort_unstable();
            out
        };
        let run = search(&field, &normalized, &sources, n_targets, params, &invariants, &mut uf)?;
        complete &= run.complete;
        states = states.max(run.states);
    }

    let mut classes: Vec<ClassInfo> = uf
        .groups()
        .into_iter()
        .filter(|g| g[0] < n_targets)
        .map(|g| {
            let members: Vec<usize> = g.iter().copied().filter(|&i| i < n_targets).collect();
            let seed = g.iter().copied().find(|&i| i >= n_targets).map(|i| i - n_targets);
            let representative = match seed {
                Some(s) => seeds[s].clone(),
                None => {
                    let deg = members.iter().map(|&i| targets[i].degree()).max().unwrap_or(1);
                    let best = members.iter().min_by_key(|&&i| targets[i].encode(deg)).unwrap();
                    targets[*best].clone()
                }
            };
            let dependence = members.iter().all(|&i| dependence[i]);
            ClassInfo { id: 0, representative, seed, members, invariants: invariants[g[0]], dependence }
        })
        .collect();
    let order_key = |c: &ClassInfo| {
        let rep = c.representative.with_ring(&ring).expect("same arity");
        (!c.invariants.automorphism, !c.invariants.signature, c.invariants.det, rep.degree(), rep.encode(rep.degree()))
    };
    classes.sort_by_cached_key(order_key);
    let mut class_of = vec![0; n_targets];
    for (pos, c) in classes.iter_mut().enumerate() {
        c.id = pos + 1;
        for &m in &c.members {
            class_of[m] = pos;
        }
    }
    let seed_class = (0..seeds.len())
        .map(|s| {
            let r = uf.find(n_targets + s);
            (r < n_targets).then(|| class_of[r])
        })
        .collect();
    Ok(ClassPartition { classes, class_of, seed_class, complete, states, stages: stages.to_vec() })
}

/// Largest state degree: exponents are packed into bytes and states are
/// converted back to the default dense basis.
pub const MAX_STATE_DEGREE: u32 = 64;

struct SearchRun {
    complete: bool,
    states: usize,
}

fn search(
    field: &FieldCtx,
    normalized: &[SMap],
    sources: &[usize],
    n_targets: usize,
    params: &ClosureParams,
    invariants: &[Invariants],
    uf: &mut UnionFind,
) -> Result<SearchRun, ClosureError> {
    let n = normalized.first().map_or(0, |s| s.comps.len());
    let moves = Move::standard(field, n, params.gen_degree);
    let bin = Binomials::new(field, MAX_STATE_DEGREE as usize);
    let mut join = |a: usize, b: usize| -> Result<(), ClosureError> {
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra != rb {
            if invariants[ra] != invariants[rb] {
                return Err(ClosureError::InvariantConflict { a: ra, b: rb });
            }
            uf.union(ra, rb);
        }
        Ok(())
    };

    let mut states: HashMap<Vec<u8>, u32> = HashMap::new();
    let mut frontier: Vec<(SMap, u32)> = Vec::new();
    for &label in sources {
        let s = &normalized[label];
        let key = s.key(n);
        match states.get(&key) {
            Some(&other) => join(label, other as usize)?,
            None => {
                states.insert(key, label as u32);
                if s.degree() <= params.d_max {
                    frontier.push((s.clone(), label as u32));
                }
            }
        }
    }

    let mut complete = true;
    let max_depth = params.target_depth.max(params.seed_depth);
    for layer in 1..=max_depth {
        frontier.retain(|(_, label)| {
            let limit = if (*label as usize) < n_targets { params.target_depth } else { params.seed_depth };
            layer <= limit
        });
        let expanded: Vec<Vec<(Vec<u8>, SMap)>> = frontier
            .par_iter()
            .map(|(state, _)| {
                let mut kids: Vec<(Vec<u8>, SMap)> = moves
                    .iter()
                    .filter_map(|mv| mv.apply(state, params.d_max, field, &bin))
                    .map(|m| (m.key(n), m))
                    .collect();
                kids.sort_by(|a, b| a.0.cmp(&b.0));
                kids.dedup_by(|a, b| a.0 == b.0);
                kids
            })
            .collect();
        let mut next = Vec::new();
        for ((_, label), kids) in frontier.iter().zip(expanded) {
            for (key, kid) in kids {
                match states.get(&key) {
                    Some(&other) => join(*label as usize, other as usize)?,
                    None => {
                        if states.len() >= params.budget {
                            complete = false;
                            continue;
                        }
                        states.insert(key, *label);
                        next.push((kid, *label));
                    }
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(SearchRun { complete, states: states.len() })
}
