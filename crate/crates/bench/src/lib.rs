//! Benchmark fixtures shared by the criterion targets.

use asq_core::ineq::{random_band_limited, AmplitudeLaw};
use asq_core::{ManifoldKind, ManifoldSpec, SpectralField};

pub fn fixture(kind: ManifoldKind, resolution: usize) -> SpectralField {
    let m = ManifoldSpec::new(kind, resolution).expect("valid manifold");
    random_band_limited(&m, m.band_limit(), 7, 0, AmplitudeLaw::PowerDecay(1.0))
}
