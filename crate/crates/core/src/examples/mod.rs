//! Built-in maps, densities and distribution functions, and figure datasets.

pub mod figures;
pub mod registry;

pub use figures::{reproduce_figure, FigureData, Series, FIGURES};

pub use registry::{envelope, get, get_cdf, get_map, EnvelopeExample, ExampleObject, ENVELOPE_IDS, IDS, UNAVAILABLE};
