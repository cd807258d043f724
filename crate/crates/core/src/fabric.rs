//! Non-blocking big-switch fabric.
//!
//! Every machine owns one egress port (traffic it sends) and one ingress port
//! (traffic it receives). Those ports are the only constrained resources; the
//! switch core never contends.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::FlowKey;
use crate::EPS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FabricError {
    #[error("a fabric needs at least one machine")]
    NoMachines,
    #[error("port capacity must be positive and finite, got {0}")]
    BadCapacity(f64),
    #[error("allocation references unknown flow {0}")]
    UnknownFlow(FlowKey),
    #[error("flow {flow} uses machine {machine} outside a {machines}-machine fabric")]
    MachineOutOfRange {
        flow: FlowKey,
        machine: usize,
        machines: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fabric {
    num_machines: usize,
    port_capacity: f64,
}

impl Fabric {
    pub fn new(num_machines: usize, port_capacity: f64) -> Result<Self, FabricError> {
        if num_machines == 0 {
            return Err(FabricError::NoMachines);
        }
        if !(port_capacity > 0.0 && port_capacity.is_finite()) {
            return Err(FabricError::BadCapacity(port_capacity));
        }
        Ok(Fabric {
            num_machines,
            port_capacity,
        })
    }

    /// Fabric with unit port capacity.
    pub fn unit(num_machines: usize) -> Result<Self, FabricError> {
        Self::new(num_machines, 1.0)
    }

    pub fn num_machines(&self) -> usize {
        self.num_machines
    }

    pub fn port_capacity(&self) -> f64 {
        self.port_capacity
    }

    pub fn ports(&self) -> impl Iterator<Item = PortId> + '_ {
        (0..self.num_machines).flat_map(|m| [PortId::egress(m), PortId::ingress(m)])
    }

    /// Port capacity minus whatever `allocation` already uses.
    pub fn residual_capacities<T: FlowTable + ?Sized>(
        &self,
        allocation: &RateAllocation,
        flows: &T,
    ) -> Result<PortCapacities, FabricError> {
        let mut residual = PortCapacities::full(self);
        for (&key, &rate) in allocation.iter() {
            let (src, dst) = self.endpoints_checked(key, flows)?;
            residual.consume(src, dst, rate);
        }
        for slot in residual.egress.iter_mut().chain(residual.ingress.iter_mut()) {
            if *slot < 0.0 && *slot > -EPS {
                *slot = 0.0;
            }
        }
        Ok(residual)
    }

    /// Collects every capacity breach and negative rate in `allocation`.
    ///
    /// Violations are returned as data; an empty report means the allocation is
    /// feasible. Unknown flows are reported too rather than aborting.
    pub fn validate_allocation<T: FlowTable + ?Sized>(
        &self,
        allocation: &RateAllocation,
        flows: &T,
    ) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut load = PortCapacities::zero(self.num_machines);
        for (&key, &rate) in allocation.iter() {
            if rate.is_nan() || rate < 0.0 {
                report.violations.push(Violation::NegativeRate { flow: key, rate });
            }
            match self.endpoints_checked(key, flows) {
                Ok((src, dst)) => {
                    load.egress[src] += rate;
                    load.ingress[dst] += rate;
                    if rate > 0.0 && flows.remaining(key).is_some_and(|r| r <= 0.0) {
                        report.violations.push(Violation::RateOnFinishedFlow { flow: key, rate });
                    }
                }
                Err(_) => report.violations.push(Violation::UnknownFlow(key)),
            }
        }
        for port in self.ports() {
            let used = load.get(port);
            if used > self.port_capacity + EPS {
                report.violations.push(Violation::OverCapacity {
                    port,
                    excess: used - self.port_capacity,
                });
            }
        }
        report
    }

    fn endpoints_checked<T: FlowTable + ?Sized>(
        &self,
        key: FlowKey,
        flows: &T,
    ) -> Result<(usize, usize), FabricError> {
        let (src, dst) = flows.endpoints(key).ok_or(FabricError::UnknownFlow(key))?;
        for machine in [src, dst] {
            if machine >= self.num_machines {
                return Err(FabricError::MachineOutOfRange {
                    flow: key,
                    machine,
                    machines: self.num_machines,
                });
            }
        }
        Ok((src, dst))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    Ingress,
    Egress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortId {
    pub machine: usize,
    pub direction: Direction,
}

impl PortId {
    pub fn ingress(machine: usize) -> Self {
        PortId {
            machine,
            direction: Direction::Ingress,
        }
    }

    pub fn egress(machine: usize) -> Self {
        PortId {
            machine,
            direction: Direction::Egress,
        }
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::Ingress => write!(f, "ingress({})", self.machine),
            Direction::Egress => write!(f, "egress({})", self.machine),
        }
    }
}

/// Anything that can resolve a flow to its endpoints and remaining bytes.
pub trait FlowTable {
    fn endpoints(&self, flow: FlowKey) -> Option<(usize, usize)>;

    /// Remaining bytes, when the table tracks them.
    fn remaining(&self, _flow: FlowKey) -> Option<f64> {
        None
    }
}

impl FlowTable for BTreeMap<FlowKey, (usize, usize)> {
    fn endpoints(&self, flow: FlowKey) -> Option<(usize, usize)> {
        self.get(&flow).copied()
    }
}

/// Per-flow transmission rates, valid until the next simulation event.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RateAllocation {
    rates: BTreeMap<FlowKey, f64>,
}

impl RateAllocation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, flow: FlowKey, rate: f64) {
        self.rates.insert(flow, rate);
    }

    pub fn add(&mut self, flow: FlowKey, rate: f64) {
        *self.rates.entry(flow).or_insert(0.0) += rate;
    }

    /// Rate of `flow`, zero when absent.
    pub fn rate(&self, flow: FlowKey) -> f64 {
        self.rates.get(&flow).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FlowKey, &f64)> {
        self.rates.iter()
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Merges `other` into `self`, summing rates of shared flows.
    pub fn absorb(&mut self, other: RateAllocation) {
        for (k, r) in other.rates {
            self.add(k, r);
        }
    }
}

impl FromIterator<(FlowKey, f64)> for RateAllocation {
    fn from_iter<I: IntoIterator<Item = (FlowKey, f64)>>(iter: I) -> Self {
        RateAllocation {
            rates: iter.into_iter().collect(),
        }
    }
}

/// Dense per-port rate table, indexed by machine.
#[derive(Debug, Clone, PartialEq)]
pub struct PortCapacities {
    egress: Vec<f64>,
    ingress: Vec<f64>,
}

impl PortCapacities {
    pub fn full(fabric: &Fabric) -> Self {
        PortCapacities {
            egress: vec![fabric.port_capacity; fabric.num_machines],
            ingress: vec![fabric.port_capacity; fabric.num_machines],
        }
    }

    pub fn zero(num_machines: usize) -> Self {
        PortCapacities {
            egress: vec![0.0; num_machines],
            ingress: vec![0.0; num_machines],
        }
    }

    pub fn num_machines(&self) -> usize {
        self.egress.len()
    }

    pub fn get(&self, port: PortId) -> f64 {
        match port.direction {
            Direction::Egress => self.egress[port.machine],
            Direction::Ingress => self.ingress[port.machine],
        }
    }

    pub fn set(&mut self, port: PortId, value: f64) {
        match port.direction {
            Direction::Egress => self.egress[port.machine] = value,
            Direction::Ingress => self.ingress[port.machine] = value,
        }
    }

    pub fn egress(&self, machine: usize) -> f64 {
        self.egress[machine]
    }

    pub fn ingress(&self, machine: usize) -> f64 {
        self.ingress[machine]
    }

    /// Capacity left for a flow from `src` to `dst`.
    pub fn path(&self, src: usize, dst: usize) -> f64 {
        self.egress[src].min(self.ingress[dst])
    }

    /// Subtracts `rate` from both ports of a `src -> dst` flow, flooring at zero.
    pub fn consume(&mut self, src: usize, dst: usize, rate: f64) {
        self.egress[src] -= rate;
        self.ingress[dst] -= rate;
        if self.egress[src].abs() < EPS {
            self.egress[src] = 0.0;
        }
        if self.ingress[dst].abs() < EPS {
            self.ingress[dst] = 0.0;
        }
    }

    /// True when no port has more than `EPS` left.
    pub fn exhausted(&self) -> bool {
        self.egress.iter().chain(&self.ingress).all(|&c| c <= EPS)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PortId, f64)> + '_ {
        (0..self.egress.len())
            .flat_map(move |m| [(PortId::egress(m), self.egress[m]), (PortId::ingress(m), self.ingress[m])])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    OverCapacity { port: PortId, excess: f64 },
    NegativeRate { flow: FlowKey, rate: f64 },
    RateOnFinishedFlow { flow: FlowKey, rate: f64 },
    UnknownFlow(FlowKey),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OverCapacity { port, excess } => write!(f, "{port} over capacity by {excess}"),
            Violation::NegativeRate { flow, rate } => write!(f, "flow {flow} has negative rate {rate}"),
            Violation::RateOnFinishedFlow { flow, rate } => {
                write!(f, "finished flow {flow} still has rate {rate}")
            }
            Violation::UnknownFlow(flow) => write!(f, "unknown flow {flow}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}
