use std::collections::BTreeMap;

/// Something that holds routes and can forget the broken ones.
pub trait RouteStore {
    /// Drops every route using the link `u - v` in either direction.
    fn invalidate_link(&mut self, u: usize, v: usize) -> usize;
    /// Drops every route from `src` to `dst`.
    fn invalidate(&mut self, src: usize, dst: usize) -> usize;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedRoute {
    pub path: Vec<usize>,
    pub created_tick: u64,
}

fn uses_link(path: &[usize], u: usize, v: usize) -> bool {
    path.windows(2).any(|w| (w[0] == u && w[1] == v) || (w[0] == v && w[1] == u))
}

/// Source routes keyed by `(src, dst)`, shortest first. Broken routes are
/// removed outright, so nothing invalid is ever handed out.
#[derive(Debug, Clone, Default)]
pub struct RouteCache {
    capacity: usize,
    entries: BTreeMap<(usize, usize), Vec<CachedRoute>>,
}

impl RouteCache {
    pub fn new(capacity: usize) -> Self {
        RouteCache { capacity: capacity.max(1), entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, path: Vec<usize>, created_tick: u64) {
        let (Some(&src), Some(&dst)) = (path.first(), path.last()) else {
            return;
        };
        let list = self.entries.entry((src, dst)).or_default();
        if let Some(existing) = list.iter_mut().find(|r| r.path == path) {
            existing.created_tick = created_tick;
            return;
        }
        list.push(CachedRoute { path, created_tick });
        // Shortest first, newest first among equals.
        list.sort_by(|a, b| a.path.len().cmp(&b.path.len()).then(b.created_tick.cmp(&a.created_tick)));
        list.truncate(self.capacity);
    }

    pub fn get(&self, src: usize, dst: usize) -> Option<&CachedRoute> {
        self.entries.get(&(src, dst)).and_then(|l| l.first())
    }

    pub fn routes(&self, src: usize, dst: usize) -> &[CachedRoute] {
        self.entries.get(&(src, dst)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl RouteStore for RouteCache {
    fn invalidate_link(&mut self, u: usize, v: usize) -> usize {
        let mut removed = 0;
        for list in self.entries.values_mut() {
            let before = list.len();
            list.retain(|r| !uses_link(&r.path, u, v));
            removed += before - list.len();
        }
        self.entries.retain(|_, l| !l.is_empty());
        removed
    }

    fn invalidate(&mut self, src: usize, dst: usize) -> usize {
        self.entries.remove(&(src, dst)).map_or(0, |l| l.len())
    }
}
