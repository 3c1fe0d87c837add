//! Flux signal of a fluxon population seen by a rolling pick-up loop.

pub mod amplitudes;
pub mod envelope;
pub mod io;
pub mod population;
pub mod spectrum;
pub mod stream;

pub use amplitudes::{harmonic_amplitudes, slow_fourier_amplitudes, SlowAmplitudes};
pub use envelope::{envelope, Envelope, EnvelopeMode, EnvelopePoint};
pub use io::{file_sink, format_f64, read_signal, write_signal, Format};
pub use population::{bias_cap, DipoleBias, FluxonPopulation, PopulationSpec, Provenance};
pub use spectrum::{power_spectrum, Spectrum, Window};
pub use stream::{
    generate_signal, generate_stream, total_flux, BlockSink, FnSink, KinematicsMode, SampledSignal, StreamConfig,
    StreamSummary,
};
