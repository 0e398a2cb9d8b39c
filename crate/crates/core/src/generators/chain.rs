//! Sequential composition of workflow nets.

use crate::error::NetError;
use crate::net::{Net, NetSpec};
use crate::workflow::validate_workflow;

/// Prefix given to the ids of the k-th net in a chain.
pub fn chain_prefix(k: usize) -> String {
    format!("n{k}.")
}

/// Disjoint union of the inputs, with a bridge transition from each final
/// place to the next initial place.
pub fn chain(nets: &[Net]) -> Result<Net, NetError> {
    if nets.is_empty() {
        return Err(NetError::Invalid("chain needs at least one net".into()));
    }
    let mut spec = NetSpec::new(format!("chain-{}", nets.len()));
    let mut endpoints = Vec::with_capacity(nets.len());
    for (k, net) in nets.iter().enumerate() {
        validate_workflow(net)
            .into_result()
            .map_err(|e| NetError::Invalid(format!("chain input {k} (`{}`): {e}", net.name())))?;
        let prefix = chain_prefix(k);
        let inner = net.to_spec();
        spec.places.extend(inner.places.iter().map(|p| format!("{prefix}{p}")));
        for t in inner.transitions {
            let rename = |m: std::collections::BTreeMap<String, u64>| {
                m.into_iter().map(|(p, w)| (format!("{prefix}{p}"), w)).collect()
            };
            spec.transitions.push(crate::net::TransitionSpec {
                id: format!("{prefix}{}", t.id),
                pre: rename(t.pre),
                post: rename(t.post),
            });
        }
        let (i, f) = net.endpoints()?;
        endpoints.push((
            format!("{prefix}{}", net.place_name(i)),
            format!("{prefix}{}", net.place_name(f)),
        ));
    }
    for k in 1..nets.len() {
        let from = endpoints[k - 1].1.clone();
        let to = endpoints[k].0.clone();
        spec.add_transition(&format!("t_aux{k}"), &[(&from, 1)], &[(&to, 1)]);
    }
    spec.initial_place = Some(endpoints[0].0.clone());
    spec.final_place = Some(endpoints[nets.len() - 1].1.clone());
    spec.build()
}
