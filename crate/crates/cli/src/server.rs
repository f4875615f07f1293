//! Websocket service: one simulation thread per connection.

use std::collections::VecDeque;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc, Notify};
use tokio_tungstenite::tungstenite::Message;

use crate::protocol::Reply;
use crate::session::{Catalog, FrameRequest, Session};

enum Out {
    Text(String),
    Frame(Vec<u8>),
}

/// Outgoing messages in order. A newer frame replaces any frame still
/// waiting, so a slow client drops frames and the simulation never waits.
#[derive(Default)]
struct Outbox {
    queue: Mutex<VecDeque<(Out, bool)>>,
    notify: Notify,
    dropped: AtomicU64,
}

impl Outbox {
    fn push_text(&self, text: String) {
        self.queue.lock().unwrap().push_back((Out::Text(text), false));
        self.notify.notify_one();
    }

    fn push_frame(&self, bytes: Vec<u8>, reliable: bool) {
        let mut q = self.queue.lock().unwrap();
        let before = q.len();
        q.retain(|(o, keep)| *keep || !matches!(o, Out::Frame(_)));
        self.dropped.fetch_add((before - q.len()) as u64, Ordering::Relaxed);
        q.push_back((Out::Frame(bytes), reliable));
        drop(q);
        self.notify.notify_one();
    }

    fn take(&self) -> Vec<Out> {
        self.queue.lock().unwrap().drain(..).map(|(o, _)| o).collect()
    }
}

pub struct Server {
    listener: TcpListener,
    catalog: Arc<Catalog>,
}

impl Server {
    pub async fn bind(addr: &str, catalog: Catalog) -> std::io::Result<Self> {
        Ok(Server {
            listener: TcpListener::bind(addr).await?,
            catalog: Arc::new(catalog),
        })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until the task is dropped.
    pub async fn run(self) {
        loop {
            match self.listener.accept().await {
                Ok((stream, peer)) => {
                    let catalog = self.catalog.clone();
                    tokio::spawn(async move {
                        if let Err(e) = connection(stream, catalog).await {
                            log::warn!("session {peer}: {e}");
                        }
                        log::info!("session {peer} closed");
                    });
                }
                Err(e) => log::warn!("accept failed: {e}"),
            }
        }
    }
}

async fn connection(stream: TcpStream, catalog: Arc<Catalog>) -> anyhow::Result<()> {
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut sink, mut source) = ws.split();
    let (cmd_tx, cmd_rx) = mpsc::unbounded_channel::<String>();
    let outbox = Arc::new(Outbox::default());
    let done = Arc::new(Notify::new());

    let sim_outbox = outbox.clone();
    let sim_done = done.clone();
    let sim = thread::spawn(move || {
        simulation_loop(catalog, cmd_rx, &sim_outbox);
        sim_done.notify_one();
    });

    let writer_outbox = outbox.clone();
    let writer = tokio::spawn(async move {
        loop {
            let batch = writer_outbox.take();
            if batch.is_empty() {
                tokio::select! {
                    _ = writer_outbox.notify.notified() => continue,
                    _ = done.notified() => {
                        for o in writer_outbox.take() {
                            send(&mut sink, o).await?;
                        }
                        break;
                    }
                }
            }
            for o in batch {
                send(&mut sink, o).await?;
            }
        }
        sink.close().await?;
        anyhow::Ok(())
    });

    while let Some(msg) = source.next().await {
        match msg? {
            Message::Text(t) => {
                if cmd_tx.send(t.to_string()).is_err() {
                    break;
                }
            }
            Message::Close(_) => break,
            Message::Binary(_) => outbox.push_text(serde_json::to_string(&Reply::Error {
                id: serde_json::Value::Null,
                message: "binary frames are not accepted".into(),
            })?),
            _ => {}
        }
    }
    drop(cmd_tx);
    let _ = tokio::task::spawn_blocking(move || sim.join()).await;
    writer.abort();
    let dropped = outbox.dropped.load(Ordering::Relaxed);
    if dropped > 0 {
        log::info!("dropped {dropped} frames for a slow client");
    }
    Ok(())
}

async fn send<S>(sink: &mut S, out: Out) -> anyhow::Result<()>
where
    S: futures_util::Sink<Message, Error = tokio_tungstenite::tungstenite::Error> + Unpin,
{
    let msg = match out {
        Out::Text(t) => Message::Text(t.into()),
        Out::Frame(b) => Message::Binary(b.into()),
    };
    sink.send(msg).await?;
    Ok(())
}

fn simulation_loop(catalog: Arc<Catalog>, mut commands: mpsc::UnboundedReceiver<String>, outbox: &Outbox) {
    let reply = |r: &Reply| outbox.push_text(serde_json::to_string(r).expect("replies serialize"));
    let mut session = match Session::new(catalog) {
        Ok(s) => s,
        Err(e) => {
            reply(&Reply::Error { id: serde_json::Value::Null, message: format!("{e:#}") });
            return;
        }
    };
    reply(&session.hello());

    let mut measured = 0.0f32;
    let mut last_step: Option<Instant> = None;
    let mut next_tick = Instant::now();
    loop {
        let input = if session.playing() {
            match commands.try_recv() {
                Ok(t) => Some(t),
                Err(mpsc::error::TryRecvError::Empty) => None,
                Err(mpsc::error::TryRecvError::Disconnected) => break,
            }
        } else {
            last_step = None;
            measured = 0.0;
            match commands.blocking_recv() {
                Some(t) => Some(t),
                None => break,
            }
        };
        if let Some(text) = input {
            reply(&session.handle_text(&text));
            match session.take_frame_request() {
                FrameRequest::None => {}
                FrameRequest::Latest => outbox.push_frame(session.frame(measured).encode(), false),
                FrameRequest::Reliable => outbox.push_frame(session.frame(measured).encode(), true),
            }
            next_tick = next_tick.max(Instant::now());
            continue;
        }

        let now = Instant::now();
        if now < next_tick {
            thread::sleep((next_tick - now).min(Duration::from_millis(5)));
            continue;
        }
        if let Err(e) = session.step() {
            reply(&Reply::Error { id: serde_json::Value::Null, message: format!("step failed: {e}") });
            session.handle_text(r#"{"cmd":"pause"}"#);
            continue;
        }
        let t = Instant::now();
        if let Some(prev) = last_step {
            let rate = 1.0 / (t - prev).as_secs_f32().max(1e-6);
            measured = if measured == 0.0 { rate } else { 0.9 * measured + 0.1 * rate };
        }
        last_step = Some(t);
        outbox.push_frame(session.frame(measured).encode(), false);
        let interval = Duration::from_secs_f64(1.0 / session.speed());
        next_tick += interval;
        if next_tick < t {
            next_tick = t;
        }
    }
}
