//! Priority queue and settled-vertex set shared by every expansion search.

/// Binary min-heap of `(key, payload)` pairs stored inline in one array.
///
/// There is no decrease-key: callers push duplicates and skip stale entries
/// on pop. Equal keys pop in payload order, which keeps every search
/// deterministic.
#[derive(Debug, Clone)]
pub struct MinQueue<K, P> {
    heap: Vec<(K, P)>,
}

impl<K: Ord + Copy, P: Ord + Copy> Default for MinQueue<K, P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord + Copy, P: Ord + Copy> MinQueue<K, P> {
    pub fn new() -> Self {
        MinQueue { heap: Vec::new() }
    }

    pub fn with_capacity(n: usize) -> Self {
        MinQueue {
            heap: Vec::with_capacity(n),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.heap.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn clear(&mut self) {
        self.heap.clear();
    }

    #[inline]
    pub fn peek(&self) -> Option<(K, P)> {
        self.heap.first().copied()
    }

    #[inline]
    pub fn peek_key(&self) -> Option<K> {
        self.heap.first().map(|e| e.0)
    }

    #[inline]
    pub fn push(&mut self, key: K, payload: P) {
        self.heap.push((key, payload));
        let mut i = self.heap.len() - 1;
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.heap[parent] <= self.heap[i] {
                break;
            }
            self.heap.swap(parent, i);
            i = parent;
        }
    }

    #[inline]
    pub fn pop_min(&mut self) -> Option<(K, P)> {
        let last = self.heap.pop()?;
        if self.heap.is_empty() {
            return Some(last);
        }
        let top = std::mem::replace(&mut self.heap[0], last);
        let n = self.heap.len();
        let mut i = 0;
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && self.heap[r] < self.heap[l] { r } else { l };
            if self.heap[i] <= self.heap[c] {
                break;
            }
            self.heap.swap(i, c);
            i = c;
        }
        Some(top)
    }
}

/// One bit per vertex, with a dirty list so small searches reset cheaply.
#[derive(Debug, Clone)]
pub struct SettledSet {
    bits: Vec<u64>,
    dirty: Vec<u32>,
    len: usize,
    /// Past this many marks a reset clears the whole bit array instead.
    dirty_limit: usize,
    overflowed: bool,
}

impl SettledSet {
    pub fn new(n: usize) -> Self {
        SettledSet {
            bits: vec![0; n.div_ceil(64)],
            dirty: Vec::new(),
            len: n,
            dirty_limit: (n / 64).max(1),
            overflowed: false,
        }
    }

    pub fn capacity(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn mark(&mut self, v: u32) {
        debug_assert!((v as usize) < self.len, "vertex {v} out of range");
        let (w, b) = (v as usize / 64, v % 64);
        if self.bits[w] & (1 << b) == 0 {
            self.bits[w] |= 1 << b;
            if !self.overflowed {
                if self.dirty.len() < self.dirty_limit {
                    self.dirty.push(v);
                } else {
                    self.overflowed = true;
                    self.dirty.clear();
                }
            }
        }
    }

    #[inline]
    pub fn query(&self, v: u32) -> bool {
        debug_assert!((v as usize) < self.len, "vertex {v} out of range");
        self.bits[v as usize / 64] & (1 << (v % 64)) != 0
    }

    /// Marks `v` and reports whether it was unmarked before.
    #[inline]
    pub fn insert(&mut self, v: u32) -> bool {
        if self.query(v) {
            false
        } else {
            self.mark(v);
            true
        }
    }

    pub fn reset(&mut self) {
        if self.overflowed {
            self.bits.iter_mut().for_each(|w| *w = 0);
            self.overflowed = false;
        } else {
            for &v in &self.dirty {
                self.bits[v as usize / 64] = 0;
            }
        }
        self.dirty.clear();
    }
}
