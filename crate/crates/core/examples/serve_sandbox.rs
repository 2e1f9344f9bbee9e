//! Runs the drawing service on localhost.
//!
//! cargo run --example serve_sandbox -- 8765 path/to/ui

use ribbon_brush::service::server::{serve, ServerOptions};

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let port: u16 = args.next().and_then(|p| p.parse().ok()).unwrap_or(8765);
    let opts = ServerOptions { static_dir: args.next().map(Into::into), ..Default::default() };
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    println!("ws://{}/ws  health: http://{0}/health", listener.local_addr()?);
    serve(listener, opts).await
}
