//! The single record holding every tunable constant.
//!
//! The underlying estimates only fix their constants up to absolute factors,
//! so every value used by the constructive routines lives here and can be
//! swept from the harness.

/// Tunable constants shared by all modules.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    /// Regularity constant for Bohr sets.
    pub c0: f64,
    /// Implemented small constant (increment factor, parameter guards).
    pub c_impl: f64,
    /// Target relative density of `L` in the Katz–Koester transform.
    pub lambda_min: f64,
    /// Constant in the exponent of the `S` density floor.
    pub sigma_floor_const: f64,
    /// Relative tolerance on floating paths.
    pub tolerance: f64,
    /// Guard band for Bohr membership comparisons.
    pub boundary_guard: f64,
    /// Number of geometric dilation factors tried in `[1/2, 1)`.
    pub kappa_grid: usize,
    /// Number of logarithmically spaced probe radii in the regularity report.
    pub probe_grid: usize,
    /// Maximal word length when covering a spectrum by a generating set.
    pub max_word_length: usize,
    /// Maximal radius halvings in the Bohr almost-period construction.
    pub cls_max_halvings: usize,
    /// Retries of the three-set almost-periodicity pipeline with halved θ.
    pub cls_retries: usize,
    /// Level-set threshold ω for the single-set increment pipeline.
    pub omega: f64,
    /// Constant `c` in ω = N^{-c ε / log(2/α̃)} for the level-set pipeline.
    pub omega_power_const: f64,
    /// Constant `c'` in log(2/v) = c' ε^{1/2} α₁^{1/4} (log N)^{1/2} (log 2/α̃)^{-7/2}.
    pub v_const: f64,
    /// Largest admissible thickness parameter v.
    pub v_max: f64,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            c0: 16.0,
            c_impl: 1.0 / 16.0,
            lambda_min: 0.5,
            sigma_floor_const: 8.0,
            tolerance: 1e-9,
            boundary_guard: 1e-12,
            kappa_grid: 64,
            probe_grid: 32,
            max_word_length: 8,
            cls_max_halvings: 20,
            cls_retries: 3,
            omega: 0.0,
            omega_power_const: 1.0 / 16.0,
            v_const: 1.0,
            v_max: 0.5,
        }
    }
}

impl Policy {
    /// Names of all keys, in serialization order.
    pub const KEYS: [&'static str; 15] = [
        "c0",
        "c_impl",
        "lambda_min",
        "sigma_floor_const",
        "tolerance",
        "boundary_guard",
        "kappa_grid",
        "probe_grid",
        "max_word_length",
        "cls_max_halvings",
        "cls_retries",
        "omega",
        "omega_power_const",
        "v_const",
        "v_max",
    ];

    /// Reads a key as `f64`; integer-valued keys are widened.
    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "c0" => self.c0,
            "c_impl" => self.c_impl,
            "lambda_min" => self.lambda_min,
            "sigma_floor_const" => self.sigma_floor_const,
            "tolerance" => self.tolerance,
            "boundary_guard" => self.boundary_guard,
            "kappa_grid" => self.kappa_grid as f64,
            "probe_grid" => self.probe_grid as f64,
            "max_word_length" => self.max_word_length as f64,
            "cls_max_halvings" => self.cls_max_halvings as f64,
            "cls_retries" => self.cls_retries as f64,
            "omega" => self.omega,
            "omega_power_const" => self.omega_power_const,
            "v_const" => self.v_const,
            "v_max" => self.v_max,
            _ => return None,
        })
    }

    /// Sets a key; returns `false` for unknown keys or out-of-range values.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        let as_count = |v: f64| (v >= 1.0 && v.fract() == 0.0).then_some(v as usize);
        match key {
            "c0" if value > 0.0 => self.c0 = value,
            "c_impl" if value > 0.0 && value < 1.0 => self.c_impl = value,
            "lambda_min" if value > 0.0 && value <= 1.0 => self.lambda_min = value,
            "sigma_floor_const" if value > 0.0 => self.sigma_floor_const = value,
            "tolerance" if value > 0.0 => self.tolerance = value,
            "boundary_guard" if value >= 0.0 => self.boundary_guard = value,
            "kappa_grid" => match as_count(value) {
                Some(v) => self.kappa_grid = v,
                None => return false,
            },
            "probe_grid" => match as_count(value) {
                Some(v) => self.probe_grid = v,
                None => return false,
            },
            "max_word_length" => match as_count(value) {
                Some(v) => self.max_word_length = v,
                None => return false,
            },
            "cls_max_halvings" => match as_count(value) {
                Some(v) => self.cls_max_halvings = v,
                None => return false,
            },
            "cls_retries" if value >= 0.0 && value.fract() == 0.0 => {
                self.cls_retries = value as usize
            }
            "omega" if (0.0..1.0).contains(&value) => self.omega = value,
            "omega_power_const" if value > 0.0 => self.omega_power_const = value,
            "v_const" if value > 0.0 => self.v_const = value,
            "v_max" if value > 0.0 && value < 1.0 => self.v_max = value,
            _ => return false,
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_constants() {
        let p = Policy::default();
        assert_eq!(p.c0, 16.0);
        assert_eq!(p.c_impl, 0.0625);
        assert_eq!(p.lambda_min, 0.5);
        assert_eq!(p.sigma_floor_const, 8.0);
        assert_eq!(p.tolerance, 1e-9);
    }

    #[test]
    fn every_key_round_trips() {
        let p = Policy::default();
        let mut q = Policy::default();
        for key in Policy::KEYS {
            let v = p.get(key).unwrap();
            assert!(q.set(key, v), "{key}");
        }
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = Policy::default();
        assert!(!p.set("c_impl", 1.5));
        assert!(!p.set("kappa_grid", 2.5));
        assert!(!p.set("nope", 1.0));
        assert!(!p.set("omega", f64::NAN));
    }
}
