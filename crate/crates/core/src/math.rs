//! `libm` shims so the numeric code reads like ordinary float code.

// When std is linked anywhere in the build its inherent methods win.
#[allow(dead_code)]
pub(crate) trait Float: Copy {
    fn ln(self) -> f64;
    fn exp(self) -> f64;
    fn sqrt(self) -> f64;
    fn powf(self, e: f64) -> f64;
    fn powi(self, e: i32) -> f64;
    fn floor(self) -> f64;
    fn ceil(self) -> f64;
}

impl Float for f64 {
    #[inline]
    fn ln(self) -> f64 {
        libm::log(self)
    }
    #[inline]
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    #[inline]
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    #[inline]
    fn powf(self, e: f64) -> f64 {
        libm::pow(self, e)
    }
    #[inline]
    fn powi(self, e: i32) -> f64 {
        libm::pow(self, e as f64)
    }
    #[inline]
    fn floor(self) -> f64 {
        libm::floor(self)
    }
    #[inline]
    fn ceil(self) -> f64 {
        libm::ceil(self)
    }
}
