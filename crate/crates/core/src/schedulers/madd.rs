use crate::fabric::{PortCapacities, RateAllocation};
use crate::model::FlowKey;
use crate::EPS;

/// Bytes a flow still has to move, with its endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowDemand {
    pub key: FlowKey,
    pub src: usize,
    pub dst: usize,
    pub remaining: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaddOutcome {
    pub allocation: RateAllocation,
    /// Common completion time from now; infinite when the group is blocked.
    pub gamma: f64,
}

impl MaddOutcome {
    pub fn is_blocked(&self) -> bool {
        self.gamma.is_infinite()
    }
}

/// Minimum-allocation-for-desired-duration.
///
/// The group's duration is its most loaded port relative to that port's
/// residual capacity; each flow then gets exactly `remaining / gamma`, so all
/// flows finish together and no more bandwidth is taken than needed.
pub fn madd_rates(flows: &[FlowDemand], residual: &PortCapacities) -> MaddOutcome {
    let machines = residual.num_machines();
    // egress bytes at [m], ingress bytes at [machines + m]
    let mut port_bytes = vec![0.0; 2 * machines];
    let mut gamma: f64 = 0.0;
    for f in flows {
        port_bytes[f.src] += f.remaining;
        port_bytes[machines + f.dst] += f.remaining;
        let path = residual.path(f.src, f.dst);
        if path <= EPS {
            return MaddOutcome {
                allocation: RateAllocation::new(),
                gamma: f64::INFINITY,
            };
        }
        gamma = gamma.max(f.remaining / path);
    }
    for f in flows {
        gamma = gamma
            .max(port_bytes[f.src] / residual.egress(f.src))
            .max(port_bytes[machines + f.dst] / residual.ingress(f.dst));
    }
    let allocation = if gamma > 0.0 {
        flows.iter().map(|f| (f.key, f.remaining / gamma)).collect()
    } else {
        RateAllocation::new()
    };
    MaddOutcome { allocation, gamma }
}
