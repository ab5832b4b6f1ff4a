//! Fan-out server: one producer, any number of subscribers.
//!
//! Each subscriber gets a bounded queue and its own writer thread. The
//! producer never blocks on a subscriber: when a queue is full the
//! subscriber is disconnected and the producer moves on.

use std::io::{self, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc::{self, SyncSender, TrySendError};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{debug, info, warn};

use super::wire::{encode_frame, WIRE_FRAME_LEN};
use crate::pose::PoseFrame;
use crate::scalar::Scalar;

pub const DEFAULT_QUEUE_DEPTH: usize = 64;
/// Per-subscriber kernel send buffer. Left to the OS, loopback buffers grow
/// to megabytes and a stalled reader would never fill its queue.
pub const DEFAULT_SEND_BUFFER: usize = 16 * 1024;
const ACCEPT_POLL: Duration = Duration::from_millis(2);

type Encoded = Arc<[u8; WIRE_FRAME_LEN]>;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Frames buffered per subscriber before it is dropped.
    pub queue_depth: usize,
    /// Kernel send buffer for subscriber sockets; `None` keeps the OS default
    /// (which may auto-tune far beyond the queue bound).
    pub send_buffer_bytes: Option<usize>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            queue_depth: DEFAULT_QUEUE_DEPTH,
            send_buffer_bytes: Some(DEFAULT_SEND_BUFFER),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ServeReport {
    pub frames_sent: u64,
    pub subscribers_accepted: usize,
    /// Disconnected because their queue overflowed.
    pub subscribers_dropped_slow: usize,
    /// Lost to write errors (peer went away).
    pub subscribers_failed: usize,
}

struct Subscriber {
    peer: SocketAddr,
    kicked: Arc<AtomicBool>,
    tx: SyncSender<Encoded>,
    control: TcpStream,
    writer: JoinHandle<()>,
}

#[derive(Default)]
struct Shared {
    subscribers: Mutex<Vec<Subscriber>>,
    accepted: AtomicUsize,
    failed: AtomicUsize,
    stop: AtomicBool,
}

/// A bound server. Subscribers are accepted from the moment of binding, so
/// clients may connect before [`Server::serve`] starts producing.
pub struct Server {
    local_addr: SocketAddr,
    queue_depth: usize,
    shared: Arc<Shared>,
    acceptor: Option<JoinHandle<()>>,
}

impl Server {
    pub fn bind<A: ToSocketAddrs>(addr: A, config: ServerConfig) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let local_addr = listener.local_addr()?;
        let shared = Arc::new(Shared::default());
        let queue_depth = config.queue_depth;
        let acceptor = {
            let shared = Arc::clone(&shared);
            thread::Builder::new()
                .name("posewire-accept".into())
                .spawn(move || accept_loop(listener, shared, config))?
        };
        info!("listening on {local_addr}");
        Ok(Self {
            local_addr,
            queue_depth,
            shared,
            acceptor: Some(acceptor),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Currently connected subscribers.
    pub fn subscriber_count(&self) -> usize {
        self.shared.subscribers.lock().expect("subscriber lock").len()
    }

    /// Polls until at least `n` subscribers are registered or `timeout` passes.
    pub fn wait_for_subscribers(&self, n: usize, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        while self.subscriber_count() < n {
            if Instant::now() >= deadline {
                return false;
            }
            thread::sleep(ACCEPT_POLL);
        }
        true
    }

    /// Broadcasts every frame, then flushes and closes all subscribers.
    pub fn serve<T, I>(mut self, frames: I) -> io::Result<ServeReport>
    where
        T: Scalar,
        I: IntoIterator<Item = PoseFrame<T>>,
    {
        let mut report = ServeReport::default();
        let queue_depth = self.queue_depth;
        for frame in frames {
            let encoded: Encoded = Arc::new(encode_frame(&frame));
            let mut subs = self.shared.subscribers.lock().expect("subscriber lock");
            subs.retain(|sub| match sub.tx.try_send(Arc::clone(&encoded)) {
                Ok(()) => true,
                Err(TrySendError::Full(_)) => {
                    warn!("subscriber {} exceeded its {queue_depth}-frame queue, disconnecting", sub.peer);
                    sub.kicked.store(true, Ordering::SeqCst);
                    let _ = sub.control.shutdown(Shutdown::Both);
                    report.subscribers_dropped_slow += 1;
                    false
                }
                // writer already gone; it counted the failure
                Err(TrySendError::Disconnected(_)) => false,
            });
            report.frames_sent += 1;
        }
        let remaining = self.shutdown();
        for sub in remaining {
            drop(sub.tx);
            let _ = sub.writer.join();
        }
        report.subscribers_accepted = self.shared.accepted.load(Ordering::SeqCst);
        report.subscribers_failed = self.shared.failed.load(Ordering::SeqCst);
        Ok(report)
    }

    fn shutdown(&mut self) -> Vec<Subscriber> {
        self.shared.stop.store(true, Ordering::SeqCst);
        if let Some(acceptor) = self.acceptor.take() {
            let _ = acceptor.join();
        }
        std::mem::take(&mut *self.shared.subscribers.lock().expect("subscriber lock"))
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        for sub in self.shutdown() {
            let _ = sub.control.shutdown(Shutdown::Both);
        }
    }
}

fn accept_loop(listener: TcpListener, shared: Arc<Shared>, config: ServerConfig) {
    while !shared.stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, peer)) => match register(stream, peer, &shared, &config) {
                Ok(sub) => {
                    debug!("subscriber {peer} connected");
                    shared.accepted.fetch_add(1, Ordering::SeqCst);
                    shared.subscribers.lock().expect("subscriber lock").push(sub);
                }
                Err(e) => warn!("could not set up subscriber {peer}: {e}"),
            },
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(ACCEPT_POLL),
            Err(e) => {
                warn!("accept failed: {e}");
                thread::sleep(ACCEPT_POLL);
            }
        }
    }
}

fn register(stream: TcpStream, peer: SocketAddr, shared: &Arc<Shared>, config: &ServerConfig) -> io::Result<Subscriber> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    if let Some(bytes) = config.send_buffer_bytes {
        socket2::SockRef::from(&stream).set_send_buffer_size(bytes)?;
    }
    let control = stream.try_clone()?;
    let (tx, rx) = mpsc::sync_channel::<Encoded>(config.queue_depth);
    let shared = Arc::clone(shared);
    let kicked = Arc::new(AtomicBool::new(false));
    let writer_kicked = Arc::clone(&kicked);
    let writer = thread::Builder::new()
        .name(format!("posewire-sub-{peer}"))
        .spawn(move || {
            let mut stream = stream;
            for frame in rx {
                if let Err(e) = stream.write_all(&frame[..]) {
                    info!("subscriber {peer} write failed: {e}");
                    if !writer_kicked.load(Ordering::SeqCst) {
                        shared.failed.fetch_add(1, Ordering::SeqCst);
                    }
                    return;
                }
            }
            let _ = stream.flush();
            let _ = stream.shutdown(Shutdown::Write);
        })?;
    Ok(Subscriber {
        peer,
        kicked,
        tx,
        control,
        writer,
    })
}

/// Releases items no faster than `fps`, measured from the first pull.
pub struct Paced<I> {
    inner: I,
    period: Duration,
    start: Option<Instant>,
    emitted: u32,
}

pub fn paced<I: Iterator>(inner: I, fps: f64) -> Paced<I> {
    Paced {
        inner,
        period: Duration::from_secs_f64(1.0 / fps),
        start: None,
        emitted: 0,
    }
}

impl<I: Iterator> Iterator for Paced<I> {
    type Item = I::Item;

    fn next(&mut self) -> Option<I::Item> {
        let start = *self.start.get_or_insert_with(Instant::now);
        let due = start + self.period * self.emitted;
        let now = Instant::now();
        if due > now {
            thread::sleep(due - now);
        }
        let item = self.inner.next()?;
        self.emitted += 1;
        Some(item)
    }
}
