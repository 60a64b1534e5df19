use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use tokio::net::UdpSocket;
use tokio::sync::oneshot;
use tokio::task::JoinSet;

use super::{Server, ServerConfig, ServerError};
use crate::clock::{Clock, OverrideClock, SystemClock};
use crate::events::EventLog;
use crate::wire::MAX_PACKET_LEN;

pub async fn bind_socket(addr: SocketAddr) -> Result<UdpSocket, ServerError> {
    UdpSocket::bind(addr)
        .await
        .map_err(|source| ServerError::Bind { addr, source })
}

/// Receives datagrams until `shutdown` resolves, answering each on its own
/// task. In-flight requests finish and the delivery log is flushed before
/// returning.
pub async fn serve(
    socket: UdpSocket,
    server: Arc<Server>,
    clock: Arc<dyn Clock>,
    shutdown: impl Future<Output = ()>,
) -> Result<(), ServerError> {
    let socket = Arc::new(socket);
    let mut tasks = JoinSet::new();
    let mut buf = vec![0u8; MAX_PACKET_LEN];
    tokio::pin!(shutdown);

    loop {
        tokio::select! {
            _ = &mut shutdown => break,
            received = socket.recv_from(&mut buf) => {
                let (len, peer) = match received {
                    Ok(r) => r,
                    // e.g. ICMP port unreachable surfaced on the next recv
                    Err(e) => {
                        server.events.event(clock.now(), "recv.error", "-", e);
                        continue;
                    }
                };
                let datagram = buf[..len].to_vec();
                let server = server.clone();
                let clock = clock.clone();
                let socket = socket.clone();
                tasks.spawn(async move {
                    let now = clock.now();
                    if let Some(reply) = server.handle_datagram(&datagram, peer, now) {
                        if let Err(e) = socket.send_to(&reply, peer).await {
                            server.events.event(now, "send.error", &peer.to_string(), e);
                        }
                    }
                });
            }
            Some(_) = tasks.join_next(), if !tasks.is_empty() => {}
        }
    }

    while tasks.join_next().await.is_some() {}
    server.flush()?;
    Ok(())
}

/// Binds, loads state from `config`, and serves until `shutdown`.
pub async fn run_server(
    config: ServerConfig,
    events: EventLog,
    shutdown: impl Future<Output = ()>,
) -> Result<(), ServerError> {
    let server = Arc::new(Server::from_config(&config, events.clone())?);
    let socket = bind_socket(config.bind).await?;
    let clock: Arc<dyn Clock> = match config.clock_override {
        Some(anchor) => Arc::new(OverrideClock::starting_at(anchor)),
        None => Arc::new(SystemClock),
    };
    let local = socket.local_addr()?;
    events.event(
        clock.now(),
        "listening",
        &local.to_string(),
        format_args!("clients={}", config.clients.len()),
    );
    serve(socket, server, clock, shutdown).await
}

/// A server running on its own thread and runtime, for tests and tools.
pub struct BackgroundServer {
    local_addr: SocketAddr,
    server: Arc<Server>,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<Result<(), ServerError>>>,
}

impl BackgroundServer {
    pub fn start(
        server: Server,
        clock: Arc<dyn Clock>,
        bind: SocketAddr,
    ) -> Result<Self, ServerError> {
        let server = Arc::new(server);
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        let socket = runtime.block_on(bind_socket(bind))?;
        let local_addr = socket.local_addr()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let shared = server.clone();
        let thread = std::thread::spawn(move || {
            runtime.block_on(serve(socket, shared, clock, async {
                let _ = stopped.await;
            }))
        });
        Ok(Self {
            local_addr,
            server,
            stop: Some(stop),
            thread: Some(thread),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn server(&self) -> &Server {
        &self.server
    }

    pub fn shutdown(mut self) -> Result<(), ServerError> {
        self.stop_and_join()
    }

    fn stop_and_join(&mut self) -> Result<(), ServerError> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().expect("server thread panicked"),
            None => Ok(()),
        }
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        let _ = self.stop_and_join();
    }
}
