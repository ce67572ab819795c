//! Counter-based random streams.
//!
//! Every random stream is determined by a root seed and a stream id. The
//! generator is ChaCha8 keyed with `seed_from_u64(root)` and positioned with
//! `set_stream(id)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Human-readable name of the generator contract, recorded in output metadata.
pub const GENERATOR: &str = "chacha8:seed_from_u64(root)+set_stream(id)";

/// Purpose tags that keep streams of different subsystems disjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u16)]
pub enum Tag {
    Audit = 1,
    Boundary = 2,
    Sup = 3,
    CDelta = 4,
    FieldCheck = 5,
    CorePairs = 6,
    Series = 7,
    Chain = 8,
    Anchor = 9,
    Bulk = 10,
    Admissible = 11,
    Harness = 12,
}

/// Packs a tag and two counters into a stream id.
pub fn stream_id(tag: Tag, a: u64, b: u64) -> u64 {
    ((tag as u64) << 48) | ((a & 0xff_ffff) << 24) | (b & 0xff_ffff)
}

/// Returns the stream for `(root, id)`.
pub fn stream(root: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(id);
    rng
}

/// Returns the stream for a tag and two counters.
pub fn tagged(root: u64, tag: Tag, a: u64, b: u64) -> StreamRng {
    stream(root, stream_id(tag, a, b))
}
