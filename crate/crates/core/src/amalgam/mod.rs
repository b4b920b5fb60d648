//! Free amalgamation over strong bases, extension templates, EC-richness
//! at a finite level, and seeded construction of finite approximations of
//! the generic structure.
//!
//! Templates, richness and the builds are implemented for the
//! relation-only predimension; [`free_amalgam`] handles every preset.

mod build;
mod free;
mod realize;
mod template;

pub use build::{generic_build, Action, BuildConfig, BuildTrace, LogEntry, Stage};
pub(crate) use build::apply_action;
pub use free::{free_amalgam, Amalgam};
pub use realize::{
    extend_over, find_embeddings, richness_deficit, richness_deficit_cached, Deficit, DeficitRecord, Level,
    TemplateCache,
};
pub(crate) use realize::{combinations, induced_code, require_trivial_r};
pub use template::{code_hash, enumerate_templates, templates_over, ExtensionTemplate, MAX_TEMPLATE_POINTS};
