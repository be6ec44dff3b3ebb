pub mod concurrence;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod polygamy;
pub mod states;
