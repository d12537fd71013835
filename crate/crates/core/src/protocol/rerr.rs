use super::cache::RouteStore;
use super::TopologySnapshot;

/// Route error travelling back to the source of a packet whose next hop
/// failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RerrMessage {
    /// `(upstream, downstream)` endpoints of the failed link.
    pub broken: (usize, usize),
    pub source: usize,
    pub destination: usize,
    /// Path back to the source, starting at the node that saw the failure.
    pub reverse_route: Vec<usize>,
}

impl RerrMessage {
    /// Error for a packet that traversed `traversed` (source first, ending at
    /// the detecting node) and could not reach `next`.
    pub fn for_failure(traversed: &[usize], next: usize, destination: usize) -> Self {
        let detector = *traversed.last().expect("non-empty traversal");
        RerrMessage {
            broken: (detector, next),
            source: traversed[0],
            destination,
            reverse_route: traversed.iter().rev().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RerrAction {
    /// Pass the error on to the given upstream neighbour.
    Forward { next: usize },
    /// The error reached the source: compute a new route.
    Reestablish,
    /// The reverse path is broken; the error dies here.
    Drop,
}

/// Processes an error at `node`, which sits at `cursor` on the reverse route.
/// Every node, the source included, forgets its routes over the broken link
/// before deciding; other routes to the destination survive.
pub fn handle_rerr<S: RouteStore>(
    rerr: &RerrMessage,
    cursor: usize,
    node: usize,
    store: &mut S,
    snapshot: &TopologySnapshot,
) -> RerrAction {
    if rerr.reverse_route.get(cursor) != Some(&node) {
        return RerrAction::Drop;
    }
    let (u, v) = rerr.broken;
    store.invalidate_link(u, v);
    if node == rerr.source {
        return RerrAction::Reestablish;
    }
    match rerr.reverse_route.get(cursor + 1) {
        Some(&next) if snapshot.linked(node, next) => RerrAction::Forward { next },
        _ => RerrAction::Drop,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ConnectivityGraph;
    use crate::protocol::cache::RouteCache;
    use crate::protocol::IntraWeight;

    fn snap(edges: &[(usize, usize)]) -> TopologySnapshot {
        TopologySnapshot::new(0, ConnectivityGraph::from_edges(5, edges), vec![Default::default(); 5], IntraWeight::Hop)
    }

    #[test]
    fn reverse_route_is_reversed_prefix() {
        let e = RerrMessage::for_failure(&[0, 1, 2], 3, 4);
        assert_eq!(e.reverse_route, vec![2, 1, 0]);
        assert_eq!(e.broken, (2, 3));
        assert_eq!(e.source, 0);
    }

    #[test]
    fn source_invalidates_and_reestablishes() {
        let e = RerrMessage::for_failure(&[0, 1, 2], 3, 4);
        let mut cache = RouteCache::new(1);
        cache.insert(vec![0, 1, 2, 3, 4], 0);
        let s = snap(&[(0, 1), (1, 2)]);
        assert_eq!(handle_rerr(&e, 2, 0, &mut cache, &s), RerrAction::Reestablish);
        assert!(cache.get(0, 4).is_none());
    }

    #[test]
    fn intermediate_forwards_upstream() {
        let e = RerrMessage::for_failure(&[0, 1, 2], 3, 4);
        let mut cache = RouteCache::new(1);
        cache.insert(vec![1, 2, 3, 4], 0);
        let s = snap(&[(0, 1), (1, 2)]);
        assert_eq!(handle_rerr(&e, 1, 1, &mut cache, &s), RerrAction::Forward { next: 0 });
        assert!(cache.get(1, 4).is_none());
    }

    #[test]
    fn broken_reverse_path_drops() {
        let e = RerrMessage::for_failure(&[0, 1, 2], 3, 4);
        let s = snap(&[(1, 2)]);
        assert_eq!(handle_rerr(&e, 1, 1, &mut RouteCache::new(1), &s), RerrAction::Drop);
        assert_eq!(handle_rerr(&e, 0, 1, &mut RouteCache::new(1), &s), RerrAction::Drop);
    }
}
