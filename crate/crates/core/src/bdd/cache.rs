/// Lossy, direct-mapped computed table. Entries from before the last
/// garbage collection are ignored via an epoch stamp. The table starts
/// small and doubles as the node table outgrows it, up to a fixed maximum.
pub(crate) struct ComputedCache {
    entries: Vec<Entry>,
    mask: usize,
    epoch: u32,
    max_len: usize,
}

const INITIAL_LOG2: u32 = 12;

#[derive(Clone, Copy, Default)]
struct Entry {
    op: u32,
    a: u32,
    b: u32,
    c: u32,
    res: u32,
    epoch: u32,
}

#[inline]
fn mix(op: u32, a: u32, b: u32, c: u32) -> usize {
    let mut h = (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    h ^= (b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    h ^= (c as u64).wrapping_mul(0x1656_67B1_9E37_79F9);
    h ^= op as u64;
    h ^= h >> 29;
    h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    (h ^ (h >> 32)) as usize
}

impl ComputedCache {
    pub(crate) fn new(log2_max: u32) -> Self {
        let size = 1usize << log2_max.min(INITIAL_LOG2);
        ComputedCache {
            entries: vec![Entry::default(); size],
            mask: size - 1,
            // epoch 0 marks never-written slots
            epoch: 1,
            max_len: 1usize << log2_max,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.entries.len()
    }

    /// Doubles the table (dropping its contents) unless at the maximum.
    pub(crate) fn grow(&mut self) {
        let size = self.entries.len() * 2;
        if size <= self.max_len {
            self.entries = vec![Entry::default(); size];
            self.mask = size - 1;
            self.epoch = 1;
        }
    }

    #[inline]
    pub(crate) fn get(&self, op: u32, a: u32, b: u32, c: u32) -> Option<u32> {
        let e = &self.entries[mix(op, a, b, c) & self.mask];
        if e.epoch == self.epoch && e.op == op && e.a == a && e.b == b && e.c == c {
            Some(e.res)
        } else {
            None
        }
    }

    #[inline]
    pub(crate) fn put(&mut self, op: u32, a: u32, b: u32, c: u32, res: u32) {
        let epoch = self.epoch;
        self.entries[mix(op, a, b, c) & self.mask] = Entry {
            op,
            a,
            b,
            c,
            res,
            epoch,
        };
    }

    pub(crate) fn invalidate(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.entries.iter_mut().for_each(|e| *e = Entry::default());
            self.epoch = 1;
        }
    }
}
