//! Live play and level editing for impulse2d scenes over a WebSocket
//! protocol. [`Session`] holds the synchronous state machine; [`server`]
//! wraps it in a fixed-rate tick loop per connection.

pub mod edit;
pub mod protocol;
pub mod server;
pub mod session;

pub use edit::{apply_edit, EditError};
pub use protocol::{ClientMessage, Edit, EntityKind, EntityRef, EntitySpec, Frame, Mode, ServerMessage, PROTOCOL};
pub use server::{router, serve, ServerConfig};
pub use session::Session;
