//! Pre-pack repacking driven by TDI rankings.
//!
//! One step moves a single piece from the amplest size (the flop dog) to the
//! scarcest size (the top dog), keeping the pre-pack total constant. Packs
//! for advertised products must keep at least one piece in every main size;
//! when the flop dog cannot give up a piece, the next-amplest size that can
//! is used instead.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{SizeId, SizeSet, TransactionSet};
use crate::error::{Error, Result};
use crate::tdi::{tdi_profiles, Dampening, TdiProfile};

/// Piece counts per size of a pre-pack.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LotType {
    counts: Vec<u32>,
}

impl LotType {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::Contract("a lot-type needs at least one piece".into()));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, size: SizeId) -> u32 {
        self.counts[size]
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Moves one piece from `remove` to `add`. `None` if `remove` is empty.
    pub fn swap(&self, remove: SizeId, add: SizeId) -> Option<LotType> {
        if self.counts[remove] == 0 {
            return None;
        }
        let mut counts = self.counts.clone();
        counts[remove] -= 1;
        counts[add] += 1;
        Some(Self { counts })
    }

    /// `S=1;M=2;L=2;XL=1`
    pub fn display(&self, sizes: &SizeSet) -> String {
        self.counts
            .iter()
            .enumerate()
            .map(|(s, c)| format!("{}={c}", sizes.label(s)))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    Advertised,
    Plain,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Advertised => "advertised",
            Variant::Plain => "plain",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DogClass {
    Act { top: SizeId, flop: SizeId },
    NoAction,
}

/// Picks the top dog (highest TDI) and flop dog (lowest TDI), ties going to
/// the earlier size. Branches whose max/min TDI ratio is below `rho`, or
/// whose sizes all tie, need no action.
pub fn classify_dogs(profile: &TdiProfile, rho: f64) -> DogClass {
    if profile.size_count() < 2 {
        return DogClass::NoAction;
    }
    let top = profile.rank_sizes()[0];
    let flop = profile.amplest_first()[0];
    if profile.tdi[top] == profile.tdi[flop] || profile.spread() < rho {
        return DogClass::NoAction;
    }
    DogClass::Act { top, flop }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepackOutcome {
    Swap { remove: SizeId, add: SizeId, lot: LotType },
    NoAction { reason: String },
}

impl RepackOutcome {
    pub fn lot(&self) -> Option<&LotType> {
        match self {
            RepackOutcome::Swap { lot, .. } => Some(lot),
            RepackOutcome::NoAction { .. } => None,
        }
    }
}

fn removable(lot: &LotType, size: SizeId, variant: Variant, sizes: &SizeSet) -> bool {
    let floor = match variant {
        Variant::Advertised if sizes.is_main(size) => 2,
        _ => 1,
    };
    lot.count(size) >= floor
}

/// One-piece swap into `top`. The piece comes from `flop` if it can spare
/// one, otherwise from the first size of `amplest_first` that can.
pub fn repack(
    lot: &LotType,
    top: SizeId,
    flop: SizeId,
    amplest_first: &[SizeId],
    variant: Variant,
    sizes: &SizeSet,
) -> RepackOutcome {
    if lot.len() != sizes.len() {
        return RepackOutcome::NoAction {
            reason: format!("lot has {} sizes, expected {}", lot.len(), sizes.len()),
        };
    }
    let remove = std::iter::once(flop)
        .chain(amplest_first.iter().copied())
        .filter(|&s| s != top)
        .find(|&s| removable(lot, s, variant, sizes));
    match remove {
        Some(remove) => RepackOutcome::Swap {
            remove,
            add: top,
            lot: lot.swap(remove, top).expect("removable size has a piece"),
        },
        None => RepackOutcome::NoAction {
            reason: format!("no size can give up a piece in the {variant} variant"),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepackPlan {
    pub branch: String,
    pub advertised: RepackOutcome,
    pub plain: RepackOutcome,
}

impl RepackPlan {
    pub fn outcome(&self, variant: Variant) -> &RepackOutcome {
        match variant {
            Variant::Advertised => &self.advertised,
            Variant::Plain => &self.plain,
        }
    }
}

pub fn plan_branch(profile: &TdiProfile, lot: &LotType, rho: f64, sizes: &SizeSet) -> RepackPlan {
    let outcome = |variant| match classify_dogs(profile, rho) {
        DogClass::NoAction => RepackOutcome::NoAction {
            reason: "balanced TDIs".into(),
        },
        DogClass::Act { top, flop } => repack(lot, top, flop, &profile.amplest_first(), variant, sizes),
    };
    RepackPlan {
        branch: profile.branch.clone(),
        advertised: outcome(Variant::Advertised),
        plain: outcome(Variant::Plain),
    }
}

/// One improvement step: a plan for every branch in `lots`, from the TDI
/// profiles of `ts`. Branches without data get an all-neutral profile and
/// therefore no action.
pub fn optimization_step(
    ts: &TransactionSet,
    lots: &BTreeMap<String, LotType>,
    c: Dampening,
    rho: f64,
) -> BTreeMap<String, RepackPlan> {
    let profiles: BTreeMap<String, TdiProfile> =
        tdi_profiles(ts, c).into_iter().map(|p| (p.branch.clone(), p)).collect();
    lots.iter()
        .map(|(branch, lot)| {
            let profile = profiles.get(branch).cloned().unwrap_or_else(|| {
                TdiProfile::from_counts(branch, vec![Default::default(); ts.sizes().len()], 0, c)
            });
            (branch.clone(), plan_branch(&profile, lot, rho, ts.sizes()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tdi::DogCounts;

    const S: SizeId = 0;
    const M: SizeId = 1;
    const L: SizeId = 2;
    const XL: SizeId = 3;

    fn lot(c: [u32; 4]) -> LotType {
        LotType::new(c.to_vec()).unwrap()
    }

    fn profile(counts: [(u64, u64); 4]) -> TdiProfile {
        TdiProfile::from_counts(
            "b",
            counts.iter().map(|&(tdc, fdc)| DogCounts { tdc, fdc }).collect(),
            10,
            Dampening::default(),
        )
    }

    #[test]
    fn classify_strict_extremes() {
        // TDIs ≈ 0.79, 1.0, 1.13, 1.93
        let p = profile([(0, 4), (0, 0), (2, 0), (14, 0)]);
        assert_eq!(classify_dogs(&p, 1.0), DogClass::Act { top: XL, flop: S });
    }

    #[test]
    fn classify_balanced_is_no_action() {
        let p = profile([(3, 3); 4]);
        assert_eq!(classify_dogs(&p, 1.2), DogClass::NoAction);
        assert_eq!(classify_dogs(&p, 1.0), DogClass::NoAction);
        let mild = profile([(1, 0), (0, 0), (0, 0), (0, 1)]);
        assert_eq!(classify_dogs(&mild, 1.2), DogClass::NoAction);
        assert!(matches!(classify_dogs(&mild, 1.0), DogClass::Act { .. }));
    }

    #[test]
    fn classify_ties_pick_earlier_sizes() {
        // TDIs (1.5, 1.0, 1.0, 1.5) with C = 15: tdc 7.5 is not integral, so
        // use C = 2: (1+2)/2 = 1.5
        let p = TdiProfile::from_counts(
            "b",
            vec![
                DogCounts { tdc: 1, fdc: 0 },
                DogCounts { tdc: 0, fdc: 0 },
                DogCounts { tdc: 0, fdc: 0 },
                DogCounts { tdc: 1, fdc: 0 },
            ],
            2,
            Dampening::new(2, 1).unwrap(),
        );
        assert_eq!(classify_dogs(&p, 1.0), DogClass::Act { top: S, flop: M });
    }

    #[test]
    fn plain_swap_moves_one_piece() {
        let sizes = SizeSet::standard();
        let out = repack(&lot([1, 2, 2, 1]), XL, M, &[M, S, L, XL], Variant::Plain, &sizes);
        assert_eq!(
            out,
            RepackOutcome::Swap {
                remove: M,
                add: XL,
                lot: lot([1, 1, 2, 2])
            }
        );
    }

    #[test]
    fn advertised_keeps_main_size_floor() {
        let sizes = SizeSet::standard();
        let order = [S, L, M, XL];
        let ad = repack(&lot([1, 2, 2, 1]), XL, S, &order, Variant::Advertised, &sizes);
        assert_eq!(ad.lot(), Some(&lot([1, 2, 1, 2])));
        let plain = repack(&lot([1, 2, 2, 1]), XL, S, &order, Variant::Plain, &sizes);
        assert_eq!(plain.lot(), Some(&lot([0, 2, 2, 2])));
    }

    #[test]
    fn non_main_size_may_drop_to_zero_when_advertised() {
        let sizes = SizeSet::new(&["XS", "S", "M", "L"], &["S", "M", "L"]).unwrap();
        let out = repack(&lot([1, 1, 1, 1]), 3, 0, &[0, 1, 2, 3], Variant::Advertised, &sizes);
        assert_eq!(out.lot(), Some(&lot([0, 1, 1, 2])));
    }

    #[test]
    fn empty_flop_falls_back_in_plain_variant() {
        let sizes = SizeSet::standard();
        let out = repack(&lot([0, 3, 1, 1]), XL, S, &[S, L, M, XL], Variant::Plain, &sizes);
        assert_eq!(out.lot(), Some(&lot([0, 3, 0, 2])));
    }

    #[test]
    fn nothing_removable_is_no_action() {
        let sizes = SizeSet::standard();
        let out = repack(&lot([1, 1, 1, 1]), XL, S, &[S, M, L, XL], Variant::Advertised, &sizes);
        assert!(matches!(out, RepackOutcome::NoAction { .. }));
        let out = repack(&lot([0, 0, 0, 3]), XL, S, &[S, M, L, XL], Variant::Plain, &sizes);
        assert!(matches!(out, RepackOutcome::NoAction { .. }));
    }

    #[test]
    fn swap_inverse_restores_lot() {
        let l = lot([1, 2, 2, 1]);
        let s = l.swap(M, XL).unwrap();
        assert_eq!(s.swap(XL, M).unwrap(), l);
        assert_eq!(lot([0, 1, 0, 0]).swap(S, M), None);
        assert!(LotType::new(vec![0, 0]).is_err());
    }

    #[test]
    fn display_uses_labels() {
        assert_eq!(lot([1, 2, 2, 1]).display(&SizeSet::standard()), "S=1;M=2;L=2;XL=1");
    }
}
