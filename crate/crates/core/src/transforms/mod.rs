//! Shifting (compression) and shadow operators.

mod downsets;
mod shadow;
mod shift;

pub use downsets::{dominates, enumerate_shifted_families, for_each_shifted_family, lower_covers, MAX_LAYER};
pub use shadow::{bt_check, kk_min_shadow_size, lower_shadow, upper_shadow, BtCheck, Direction};
pub use shift::{is_shifted, shift_closure, shift_ij, ShiftReport};
