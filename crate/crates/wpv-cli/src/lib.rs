//! Command-line companion to the exact volume/intersection library:
//! output formatting, the persistent bracket cache, floating-point
//! quadrature cross-checks, and the verification drivers.  Everything here is
//! IO and presentation; the mathematics lives in `wpv-core`.

pub mod cache;
pub mod formats;
pub mod quad;
pub mod verify;

use std::path::PathBuf;

/// Output format selector shared by the printing commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Plain text with exact fractions over a common denominator.
    Text,
    /// JSON with exact fraction-string coefficients.
    Json,
    /// LaTeX source.
    Latex,
    /// One `monomial,coefficient` (or table) row per line.
    Csv,
}

/// Bundled parameters of one invocation, resolved from flags and environment.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub g_max: u32,
    pub n_max: u32,
    pub d_max: u32,
    pub cache_path: Option<PathBuf>,
    pub format: Format,
    pub tolerance: f64,
    pub parallelism: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            g_max: 2,
            n_max: 4,
            d_max: 3,
            cache_path: None,
            format: Format::Text,
            tolerance: 1e-9,
            parallelism: None,
        }
    }
}

impl RunConfig {
    /// Usage-level validation; violations are reported with exit code 2.
    pub fn validate(&self) -> Result<(), String> {
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err("tolerance must be a positive finite number".to_string());
        }
        if self.parallelism == Some(0) {
            return Err("parallelism must be at least 1".to_string());
        }
        if self.n_max == 0 {
            return Err("n_max must be at least 1".to_string());
        }
        Ok(())
    }

    /// Installs the requested global rayon pool size, if any.  Later calls
    /// with the pool already built are ignored (first setting wins).
    pub fn install_thread_pool(&self) {
        if let Some(threads) = self.parallelism {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
}
