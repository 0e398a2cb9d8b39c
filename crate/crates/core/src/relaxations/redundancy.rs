//! Places that can never be continuously marked from i:1.

use std::collections::HashSet;

use num_traits::Zero;

use crate::error::NetError;
use crate::marking::{Marking, ParikhVector, RationalMarking};
use crate::net::{Net, PlaceId, TransitionId};
use crate::relaxations::maxfs::{max_fireable_set, FireableSet};
use crate::workflow::validate_workflow;

/// Every transition in the saturation can fire by some positive amount, in
/// saturation order, so the continuously markable places are exactly the
/// initially marked ones plus the posts of the saturation.
fn saturation_from_initial(net: &Net) -> Result<FireableSet, NetError> {
    let (i, _) = net.endpoints()?;
    Ok(max_fireable_set(net, &[i], &vec![true; net.num_transitions()]))
}

pub fn is_nonredundant(net: &Net, p: PlaceId) -> Result<bool, NetError> {
    Ok(saturation_from_initial(net)?.reached[p.0])
}

/// A net with redundant places removed, and the maps back to the original.
#[derive(Clone, Debug)]
pub struct Pruned {
    pub net: Net,
    pub removed_places: Vec<String>,
    pub removed_transitions: Vec<String>,
    /// Original place of each remaining place.
    pub place_map: Vec<PlaceId>,
    /// Original transition of each remaining transition.
    pub transition_map: Vec<TransitionId>,
    original_places: usize,
    original_transitions: usize,
}

impl Pruned {
    pub fn is_identity(&self) -> bool {
        self.removed_places.is_empty() && self.removed_transitions.is_empty()
    }

    pub fn lift_marking(&self, m: &Marking) -> Marking {
        let mut out = Marking::zero(self.original_places);
        for (new, old) in self.place_map.iter().enumerate() {
            out.set(*old, m.get(PlaceId(new)));
        }
        out
    }

    pub fn lift_rational_marking(&self, m: &RationalMarking) -> RationalMarking {
        let mut out = RationalMarking::zero(self.original_places);
        for (new, old) in self.place_map.iter().enumerate() {
            out.set(*old, m.get(PlaceId(new)).clone());
        }
        out
    }

    pub fn lift_parikh(&self, x: &ParikhVector) -> ParikhVector {
        let mut out = ParikhVector::zero(self.original_transitions);
        for (new, old) in self.transition_map.iter().enumerate() {
            let v = x.get(TransitionId(new));
            if !v.is_zero() {
                out.set(*old, v.clone());
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct PruneFailure {
    pub removed_places: Vec<String>,
    pub violations: String,
}

/// Drops every redundant place, every transition consuming from one, and arcs into them.
/// When the result is not a workflow net the failure is reported and nothing is removed.
pub fn remove_redundant_places(net: &Net) -> Result<Result<Pruned, PruneFailure>, NetError> {
    let mut current = net.clone();
    let mut place_map: Vec<PlaceId> = net.place_ids().collect();
    let mut transition_map: Vec<TransitionId> = net.transition_ids().collect();
    let mut removed_places = Vec::new();
    let mut removed_transitions = Vec::new();
    loop {
        let sat = saturation_from_initial(&current)?;
        let keep_places: HashSet<PlaceId> = current.place_ids().filter(|p| sat.reached[p.0]).collect();
        let keep_transitions: HashSet<TransitionId> = current
            .transition_ids()
            .filter(|&t| current.pre(t).places().all(|p| keep_places.contains(&p)))
            .collect();
        if keep_places.len() == current.num_places() && keep_transitions.len() == current.num_transitions() {
            break;
        }
        let (_, f) = current.endpoints()?;
        if !keep_places.contains(&f) {
            return Ok(Err(PruneFailure {
                removed_places: current
                    .place_ids()
                    .filter(|p| !keep_places.contains(p))
                    .map(|p| current.place_name(p).to_string())
                    .collect(),
                violations: format!("final place {} is not continuously markable", current.place_name(f)),
            }));
        }
        removed_places.extend(
            current
                .place_ids()
                .filter(|p| !keep_places.contains(p))
                .map(|p| current.place_name(p).to_string()),
        );
        removed_transitions.extend(
            current
                .transition_ids()
                .filter(|t| !keep_transitions.contains(t))
                .map(|t| current.transition_name(t).to_string()),
        );
        let (next, pmap, tmap) = current.restrict(&keep_places, &keep_transitions);
        place_map = pmap.iter().map(|p| place_map[p.0]).collect();
        transition_map = tmap.iter().map(|t| transition_map[t.0]).collect();
        current = next;
    }
    let check = validate_workflow(&current);
    if !check.is_ok() {
        let text: Vec<String> = check.violations.iter().map(|v| v.to_string()).collect();
        return Ok(Err(PruneFailure {
            removed_places,
            violations: text.join("; "),
        }));
    }
    Ok(Ok(Pruned {
        net: current,
        removed_places,
        removed_transitions,
        place_map,
        transition_map,
        original_places: net.num_places(),
        original_transitions: net.num_transitions(),
    }))
}
