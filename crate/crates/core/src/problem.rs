//! Problem model: exact-cover instances, the pairwise conflict graph,
//! objective weights, and the scalar objective evaluated on selection
//! bitmasks.
//!
//! A selection of sets is encoded as a bitmask where bit `i` selects
//! set `i` (0-based). Universe elements are written 1-based in the text
//! format but stored as bit `e - 1` of a `u64` element mask.

use crate::error::{Error, Result};
use crate::statevector::MAX_QUBITS;

/// Largest universe representable in a single element mask.
pub const MAX_UNIVERSE: usize = 64;

/// A minimum-exact-cover instance: a universe {1..m} and a collection
/// of candidate subsets.
///
/// Invariants enforced at construction: at least two sets, every set
/// nonempty and strictly inside the universe, no duplicate elements in
/// a set, and the union of all sets covering the whole universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MecInstance {
    m: usize,
    sets: Vec<Vec<usize>>,
    element_masks: Vec<u64>,
    weights: Vec<usize>,
}

impl MecInstance {
    pub fn new(m: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        if m < 2 || m > MAX_UNIVERSE {
            return Err(Error::OutOfRange {
                what: "universe size",
                value: m,
                min: 2,
                max: MAX_UNIVERSE,
            });
        }
        if sets.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 sets, got {}",
                sets.len()
            )));
        }
        if sets.len() > MAX_QUBITS {
            return Err(Error::OutOfRange {
                what: "set count",
                value: sets.len(),
                min: 2,
                max: MAX_QUBITS,
            });
        }
        let full_mask = full_mask(m);
        let mut element_masks = Vec::with_capacity(sets.len());
        let mut weights = Vec::with_capacity(sets.len());
        let mut sorted_sets = Vec::with_capacity(sets.len());
        for (i, set) in sets.into_iter().enumerate() {
            let label = i + 1;
            if set.is_empty() {
                return Err(Error::InvalidInstance(format!("set {label} is empty")));
            }
            let mut mask = 0u64;
            for &element in &set {
                if element < 1 || element > m {
                    return Err(Error::InvalidInstance(format!(
                        "set {label}: element {element} out of range 1..={m}"
                    )));
                }
                let bit = 1u64 << (element - 1);
                if mask & bit != 0 {
                    return Err(Error::InvalidInstance(format!(
                        "set {label}: duplicate element {element}"
                    )));
                }
                mask |= bit;
            }
            if mask == full_mask {
                return Err(Error::InvalidInstance(format!(
                    "set {label} equals the whole universe"
                )));
            }
            let mut set = set;
            set.sort_unstable();
            weights.push(set.len());
            element_masks.push(mask);
            sorted_sets.push(set);
        }
        let union = element_masks.iter().fold(0u64, |acc, m| acc | m);
        if union != full_mask {
            let missing: Vec<String> = (1..=m)
                .filter(|e| union & (1u64 << (e - 1)) == 0)
                .map(|e| e.to_string())
                .collect();
            return Err(Error::InvalidInstance(format!(
                "union of sets misses elements {{{}}}",
                missing.join(", ")
            )));
        }
        Ok(MecInstance {
            m,
            sets: sorted_sets,
            element_masks,
            weights,
        })
    }

    /// Universe size.
    pub fn universe_size(&self) -> usize {
        self.m
    }

    /// Number of candidate sets, one qubit each.
    pub fn set_count(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    /// Set sizes, used as objective weights.
    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn element_mask(&self, i: usize) -> u64 {
        self.element_masks[i]
    }

    pub fn full_mask(&self) -> u64 {
        full_mask(self.m)
    }

    /// Sum of set sizes over the selected sets.
    pub fn selection_weight(&self, selection: usize) -> usize {
        iter_bits(selection).map(|i| self.weights[i]).sum()
    }
}

fn full_mask(m: usize) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

fn iter_bits(mask: usize) -> impl Iterator<Item = usize> {
    std::iter::successors(
        if mask == 0 { None } else { Some(mask) },
        |&rest| {
            let rest = rest & (rest - 1);
            if rest == 0 {
                None
            } else {
                Some(rest)
            }
        },
    )
    .map(|rest| rest.trailing_zeros() as usize)
}

/// Undirected graph with one vertex per candidate set and an edge
/// wherever two sets share an element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    neighbor_masks: Vec<u32>,
}

impl ConflictGraph {
    pub fn vertex_count(&self) -> usize {
        self.neighbor_masks.len()
    }

    /// Neighbors of `v` as a bitmask over vertices.
    pub fn neighbor_mask(&self, v: usize) -> u32 {
        self.neighbor_masks[v]
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        iter_bits(self.neighbor_masks[v] as usize).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.neighbor_masks[u] >> v & 1 == 1
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.vertex_count();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if self.has_edge(u, v) {
                    edges.push((u, v));
                }
            }
        }
        edges
    }

    pub fn edge_count(&self) -> usize {
        self.neighbor_masks
            .iter()
            .map(|m| m.count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut seen = 1u32;
        let mut frontier = 1u32;
        while frontier != 0 {
            let mut next = 0u32;
            for v in iter_bits(frontier as usize) {
                next |= self.neighbor_masks[v] & !seen;
            }
            seen |= next;
            frontier = next;
        }
        seen.count_ones() as usize == n
    }
}

fn graph_from_masks(masks: &[u64]) -> ConflictGraph {
    let n = masks.len();
    let mut neighbor_masks = vec![0u32; n];
    for u in 0..n {
        for v in u + 1..n {
            if masks[u] & masks[v] != 0 {
                neighbor_masks[u] |= 1 << v;
                neighbor_masks[v] |= 1 << u;
            }
        }
    }
    ConflictGraph { neighbor_masks }
}

/// Conflict graph of an instance: sets are adjacent iff they intersect.
pub fn conflict_graph(instance: &MecInstance) -> ConflictGraph {
    graph_from_masks(&instance.element_masks)
}

/// Conflict graph over routes: adjacent iff they share a flight.
pub fn tail_conflict_graph(tail: &TailInstance) -> ConflictGraph {
    graph_from_masks(&tail.route_masks)
}

/// A selection is independent iff no two selected sets conflict.
pub fn is_independent(graph: &ConflictGraph, selection: usize) -> bool {
    iter_bits(selection).all(|v| graph.neighbor_masks[v] as usize & selection == 0)
}

/// A selection is an exact cover iff the selected sets are pairwise
/// disjoint and their union is the whole universe.
pub fn is_exact_cover(instance: &MecInstance, selection: usize) -> bool {
    let mut covered = 0u64;
    for i in iter_bits(selection) {
        let mask = instance.element_masks[i];
        if covered & mask != 0 {
            return false;
        }
        covered |= mask;
    }
    covered == instance.full_mask()
}

/// Objective weights: rewards per covered element, penalizes per set.
/// The ordering lambda1 > lambda2 > 0 is required for maxima of the
/// objective over independent selections to be exact covers first and
/// minimum covers among those.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambdas {
    lambda1: f64,
    lambda2: f64,
}

impl Lambdas {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1.is_finite() && lambda2.is_finite()) || !(lambda1 > lambda2 && lambda2 > 0.0) {
            return Err(Error::Domain(format!(
                "weights must satisfy lambda1 > lambda2 > 0, got ({lambda1}, {lambda2})"
            )));
        }
        Ok(Lambdas { lambda1, lambda2 })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
}

/// Default weight policy: lambda2 = 1/(n*m - 2) and lambda1 = n*lambda2,
/// which makes every exact cover beat every non-cover and shorter
/// covers beat longer ones.
pub fn default_lambdas(set_count: usize, universe_size: usize) -> Result<Lambdas> {
    if set_count * universe_size < 3 {
        return Err(Error::Domain(format!(
            "weight policy needs n*m > 2, got n={set_count} m={universe_size}"
        )));
    }
    let lambda2 = 1.0 / (set_count * universe_size - 2) as f64;
    Lambdas::new(set_count as f64 * lambda2, lambda2)
}

/// lambda1 * (covered weight) - lambda2 * (selected count) on a
/// selection bitmask.
pub fn objective_value(instance: &MecInstance, lambdas: &Lambdas, selection: usize) -> f64 {
    debug_assert!(selection < 1usize << instance.set_count());
    lambdas.lambda1 * instance.selection_weight(selection) as f64
        - lambdas.lambda2 * selection.count_ones() as f64
}

/// The objective evaluated on every basis index, in index order.
pub fn objective_diagonal(instance: &MecInstance, lambdas: &Lambdas) -> Result<Vec<f64>> {
    diagonal_from_coefficients(instance.set_count(), &per_set_coefficients(instance, lambdas))
}

fn per_set_coefficients(instance: &MecInstance, lambdas: &Lambdas) -> Vec<f64> {
    instance
        .weights
        .iter()
        .map(|&w| lambdas.lambda1 * w as f64 - lambdas.lambda2)
        .collect()
}

fn diagonal_from_coefficients(n: usize, coefficients: &[f64]) -> Result<Vec<f64>> {
    if n > MAX_QUBITS {
        return Err(Error::OutOfRange {
            what: "qubit count",
            value: n,
            min: 1,
            max: MAX_QUBITS,
        });
    }
    let mut diagonal = vec![0.0; 1usize << n];
    // Dynamic programming on the lowest set bit keeps this O(2^n).
    for index in 1..diagonal.len() {
        let low = index.trailing_zeros() as usize;
        diagonal[index] = diagonal[index & (index - 1)] + coefficients[low];
    }
    Ok(diagonal)
}

/// A tail-assignment instance: routes over a flight universe, each with
/// a nonnegative cost. Structurally an exact-cover instance whose
/// objective also penalizes cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TailInstance {
    flight_count: usize,
    routes: Vec<Vec<usize>>,
    costs: Vec<f64>,
    route_masks: Vec<u64>,
    weights: Vec<usize>,
}

impl TailInstance {
    pub fn new(flight_count: usize, routes: Vec<Vec<usize>>, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != routes.len() {
            return Err(Error::ShapeMismatch {
                what: "route costs",
                expected: routes.len(),
                actual: costs.len(),
            });
        }
        for (i, &cost) in costs.iter().enumerate() {
            if !cost.is_finite() || cost < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "route {}: cost {cost} must be finite and nonnegative",
                    i + 1
                )));
            }
        }
        if flight_count < 2 || flight_count > MAX_UNIVERSE {
            return Err(Error::OutOfRange {
                what: "flight count",
                value: flight_count,
                min: 2,
                max: MAX_UNIVERSE,
            });
        }
        if routes.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 routes, got {}",
                routes.len()
            )));
        }
        if routes.len() > MAX_QUBITS {
            return Err(Error::OutOfRange {
                what: "route count",
                value: routes.len(),
                min: 2,
                max: MAX_QUBITS,
            });
        }
        let full = full_mask(flight_count);
        let mut route_masks = Vec::with_capacity(routes.len());
        let mut weights = Vec::with_capacity(routes.len());
        let mut sorted_routes = Vec::with_capacity(routes.len());
        for (i, route) in routes.into_iter().enumerate() {
            let label = i + 1;
            if route.is_empty() {
                return Err(Error::InvalidInstance(format!("route {label} is empty")));
            }
            let mut mask = 0u64;
            for &flight in &route {
                if flight < 1 || flight > flight_count {
                    return Err(Error::InvalidInstance(format!(
                        "route {label}: flight {flight} out of range 1..={flight_count}"
                    )));
                }
                let bit = 1u64 << (flight - 1);
                if mask & bit != 0 {
                    return Err(Error::InvalidInstance(format!(
                        "route {label}: duplicate flight {flight}"
                    )));
                }
                mask |= bit;
            }
            let mut route = route;
            route.sort_unstable();
            weights.push(route.len());
            route_masks.push(mask);
            sorted_routes.push(route);
        }
        let union = route_masks.iter().fold(0u64, |acc, m| acc | m);
        if union != full {
            let missing: Vec<String> = (1..=flight_count)
                .filter(|f| union & (1u64 << (f - 1)) == 0)
                .map(|f| f.to_string())
                .collect();
            return Err(Error::InvalidInstance(format!(
                "union of routes misses flights {{{}}}",
                missing.join(", ")
            )));
        }
        Ok(TailInstance {
            flight_count,
            routes: sorted_routes,
            costs,
            route_masks,
            weights,
        })
    }

    pub fn flight_count(&self) -> usize {
        self.flight_count
    }

    pub fn route_count(&self) -> usize {
        self.routes.len()
    }

    pub fn routes(&self) -> &[Vec<usize>] {
        &self.routes
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn route_mask(&self, i: usize) -> u64 {
        self.route_masks[i]
    }

    pub fn full_mask(&self) -> u64 {
        full_mask(self.flight_count)
    }

    pub fn selection_weight(&self, selection: usize) -> usize {
        iter_bits(selection).map(|i| self.weights[i]).sum()
    }

    pub fn selection_cost(&self, selection: usize) -> f64 {
        iter_bits(selection).map(|i| self.costs[i]).sum()
    }

    /// A selection covers exactly iff routes are pairwise disjoint and
    /// together fly every flight.
    pub fn is_exact_cover(&self, selection: usize) -> bool {
        let mut covered = 0u64;
        for i in iter_bits(selection) {
            let mask = self.route_masks[i];
            if covered & mask != 0 {
                return false;
            }
            covered |= mask;
        }
        covered == self.full_mask()
    }
}

/// Weights for the tail objective; requires
/// lambda1 > lambda2 > lambda3 > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailLambdas {
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
}

impl TailLambdas {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self> {
        let finite = lambda1.is_finite() && lambda2.is_finite() && lambda3.is_finite();
        if !finite || !(lambda1 > lambda2 && lambda2 > lambda3 && lambda3 > 0.0) {
            return Err(Error::Domain(format!(
                "weights must satisfy lambda1 > lambda2 > lambda3 > 0, got ({lambda1}, {lambda2}, {lambda3})"
            )));
        }
        Ok(TailLambdas {
            lambda1,
            lambda2,
            lambda3,
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn lambda3(&self) -> f64 {
        self.lambda3
    }
}

/// Default tail weights: the exact-cover pair plus
/// lambda3 = lambda2 / route_count so the cost term never outweighs
/// the set-count term.
pub fn default_tail_lambdas(route_count: usize, flight_count: usize) -> Result<TailLambdas> {
    let base = default_lambdas(route_count, flight_count)?;
    TailLambdas::new(
        base.lambda1(),
        base.lambda2(),
        base.lambda2() / route_count as f64,
    )
}

/// lambda1 * weight - lambda2 * count - lambda3 * cost on a selection.
pub fn tail_objective_value(tail: &TailInstance, lambdas: &TailLambdas, selection: usize) -> f64 {
    debug_assert!(selection < 1usize << tail.route_count());
    lambdas.lambda1 * tail.selection_weight(selection) as f64
        - lambdas.lambda2 * selection.count_ones() as f64
        - lambdas.lambda3 * tail.selection_cost(selection)
}

/// The tail objective evaluated on every basis index, in index order.
pub fn tail_objective_diagonal(tail: &TailInstance, lambdas: &TailLambdas) -> Result<Vec<f64>> {
    diagonal_from_coefficients(tail.route_count(), &per_route_coefficients(tail, lambdas))
}

fn per_route_coefficients(tail: &TailInstance, lambdas: &TailLambdas) -> Vec<f64> {
    tail.weights
        .iter()
        .zip(&tail.costs)
        .map(|(&w, &c)| lambdas.lambda1 * w as f64 - lambdas.lambda2 - lambdas.lambda3 * c)
        .collect()
}

pub(crate) fn phase_coefficient_values(instance: &MecInstance, lambdas: &Lambdas) -> Vec<f64> {
    per_set_coefficients(instance, lambdas)
}

pub(crate) fn tail_phase_coefficient_values(
    tail: &TailInstance,
    lambdas: &TailLambdas,
) -> Vec<f64> {
    per_route_coefficients(tail, lambdas)
}
