//! Singularity bookkeeping for the two-step resolution and moduli-dimension counts.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::chart_atlas::WeightPair;
use crate::error::{GeomError, Result};

/// Replacing a `C²/Z_p` cone by `M_{k,l}` leaves cones of orders `k` and `l`; order 1 is smooth.
pub fn local_model_check(p: u32, kp: WeightPair) -> Result<Vec<u32>> {
    let (k, l) = (kp.k(), kp.l());
    if k + l != p {
        return Err(GeomError::WeightMismatch { p, k, l });
    }
    Ok([k, l].into_iter().filter(|&o| o > 1).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    pub order: u32,
    pub count: usize,
    pub stage: usize,
}

/// Multiset of cone singularities through successive resolution stages.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SingularityLedger {
    stages: Vec<BTreeMap<u32, usize>>,
}

impl SingularityLedger {
    pub fn new(order: u32, count: usize) -> Self {
        let mut m = BTreeMap::new();
        if order > 1 && count > 0 {
            m.insert(order, count);
        }
        Self { stages: vec![m] }
    }

    /// Resolve every cone of order `k + l` with `M_{k,l}`.
    pub fn resolve_with(&mut self, kp: WeightPair) -> Result<()> {
        let p = kp.k() + kp.l();
        let cur = self.stages.last().cloned().unwrap_or_default();
        let n = *cur.get(&p).ok_or(GeomError::WeightMismatch { p, k: kp.k(), l: kp.l() })?;
        let mut next = cur;
        next.remove(&p);
        for o in local_model_check(p, kp)? {
            *next.entry(o).or_default() += n;
        }
        self.stages.push(next);
        Ok(())
    }

    /// Number of resolution steps applied.
    pub fn steps(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn singular_count(&self, stage: usize) -> usize {
        self.stages.get(stage).map_or(0, |m| m.values().sum())
    }

    /// Entries for every order present at the stage or the one before it (so vanishing counts are visible).
    pub fn entries(&self) -> Vec<LedgerEntry> {
        let mut out = Vec::new();
        for (s, m) in self.stages.iter().enumerate() {
            let mut orders: Vec<u32> = m.keys().copied().collect();
            if s > 0 {
                orders.extend(self.stages[s - 1].keys());
            }
            orders.sort_unstable();
            orders.dedup();
            out.extend(orders.into_iter().map(|order| LedgerEntry {
                order,
                count: *m.get(&order).unwrap_or(&0),
                stage: s,
            }));
        }
        out
    }
}

/// `T⁴/Z₃` with nine `C²/Z₃` points, resolved by `M_{1,2}` and then `M_{1,1}`.
pub fn z3_pipeline(fixed_point_count: usize) -> Result<SingularityLedger> {
    let mut ledger = SingularityLedger::new(3, fixed_point_count);
    ledger.resolve_with(WeightPair::new(1, 2)?)?;
    ledger.resolve_with(WeightPair::new(1, 1)?)?;
    Ok(ledger)
}

/// Real dimensions of the groups entering the counts.
pub fn dim_gl_real(n: usize) -> usize {
    n * n
}
pub fn dim_orthogonal(n: usize) -> usize {
    n * (n - 1) / 2
}
pub fn dim_unitary(n: usize) -> usize {
    n * n
}
pub fn dim_gl_complex(n: usize) -> usize {
    2 * n * n
}

/// One gluing stage: each singular point contributes the dimension of the coset of the local
/// model's isometry group inside the point's isometry group, plus one homothety parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageCount {
    pub singularities: usize,
    pub coset: usize,
    pub homothety: usize,
    pub per_point: usize,
}

impl StageCount {
    fn new(singularities: usize, group: usize, stabilizer: usize) -> Self {
        let coset = group - stabilizer;
        Self { singularities, coset, homothety: 1, per_point: coset + 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuliCount {
    pub route: String,
    pub base: usize,
    pub stages: Vec<StageCount>,
    pub total: usize,
}

impl ModuliCount {
    fn new(route: &str, base: usize, stages: Vec<StageCount>) -> Self {
        let total = base + stages.iter().map(|s| s.singularities * s.per_point).sum::<usize>();
        Self { route: route.into(), base, stages, total }
    }
}

/// Moduli dimensions along the `p = 2` (Page) and `p = 3` routes.
///
/// * Page: flat `T⁴` metrics `GL(4,R)/O(4)`, then at each of 16 points `SO(4)/U(2)` plus scale.
/// * `Z₃`: base `S₃ = GL_C(2)/U(2)`; at both stages each of 9 points gives `U(2)/(U(1)×U(1))` plus scale.
pub fn moduli_dimensions(page_points: usize, z3_points: usize) -> Vec<ModuliCount> {
    let page = ModuliCount::new(
        "page",
        dim_gl_real(4) - dim_orthogonal(4),
        vec![StageCount::new(page_points, dim_orthogonal(4), dim_unitary(2))],
    );
    let torus = dim_unitary(1) + dim_unitary(1);
    let z3 = ModuliCount::new(
        "z3",
        dim_gl_complex(2) - dim_unitary(2),
        vec![StageCount::new(z3_points, dim_unitary(2), torus), StageCount::new(z3_points, dim_unitary(2), torus)],
    );
    vec![page, z3]
}
