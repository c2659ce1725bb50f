pub use crate::rng::random_config;
