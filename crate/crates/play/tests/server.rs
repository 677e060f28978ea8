use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use impulse2d::levelgen::deserialize;
use impulse2d_play::{serve, Frame, ServerConfig, ServerMessage, PROTOCOL};
use serde_json::json;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use tokio::time::timeout;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Client = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(grace: Duration, assets: Option<PathBuf>) -> SocketAddr {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../levels/M/m01_car.json");
    let config = ServerConfig {
        tick_rate: 100,
        grace,
        initial_level: deserialize(&std::fs::read(path).unwrap()).unwrap(),
        assets,
    };
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve(listener, config));
    addr
}

async fn connect(addr: SocketAddr, session: Option<&str>) -> Client {
    let url = match session {
        Some(id) => format!("ws://{addr}/ws?session={id}"),
        None => format!("ws://{addr}/ws"),
    };
    connect_async(url).await.unwrap().0
}

async fn next(ws: &mut Client) -> ServerMessage {
    loop {
        let msg = timeout(Duration::from_secs(5), ws.next()).await.expect("server went quiet").unwrap().unwrap();
        if let Message::Text(text) = msg {
            return serde_json::from_str(&text).unwrap();
        }
    }
}

async fn next_frame(ws: &mut Client) -> Frame {
    loop {
        if let ServerMessage::Frame(f) = next(ws).await {
            return f;
        }
    }
}

async fn hello(ws: &mut Client) -> String {
    match next(ws).await {
        ServerMessage::Hello { protocol, session, tick_rate } => {
            assert_eq!((protocol.as_str(), tick_rate), (PROTOCOL, 100));
            session
        }
        other => panic!("expected hello, got {other:?}"),
    }
}

async fn send(ws: &mut Client, msg: serde_json::Value) {
    ws.send(Message::Text(msg.to_string().into())).await.unwrap();
}

#[tokio::test]
async fn frames_stream_without_input() {
    let addr = start(Duration::from_secs(5), None).await;
    let mut ws = connect(addr, None).await;
    hello(&mut ws).await;
    let first = next_frame(&mut ws).await;
    assert_eq!(first.level, "m01_car");
    let mut last = first;
    for _ in 0..10 {
        let f = next_frame(&mut ws).await;
        assert!(f.seq > last.seq && f.tick == last.tick + 1);
        assert!(f.action.motors.iter().chain(&f.action.thrusters).all(|&v| v == 0.0));
        last = f;
    }
}

#[tokio::test]
async fn actions_and_errors_round_trip() {
    let addr = start(Duration::from_secs(5), None).await;
    let mut ws = connect(addr, None).await;
    hello(&mut ws).await;
    send(&mut ws, json!({"type": "action", "motors": [1.0, 1.0], "thrusters": [0.0, 0.0]})).await;
    let f = loop {
        let f = next_frame(&mut ws).await;
        if f.action.motors == vec![1.0, 1.0] {
            break f;
        }
    };
    assert!(f.tick >= 1);

    ws.send(Message::Text("{nonsense".into())).await.unwrap();
    let err = loop {
        match next(&mut ws).await {
            ServerMessage::Error { code, .. } => break code,
            ServerMessage::Frame(_) => continue,
            other => panic!("{other:?}"),
        }
    };
    assert_eq!(err, "malformed");
    let after = next_frame(&mut ws).await;
    assert!(after.tick > f.tick);

    send(&mut ws, json!({"type": "save"})).await;
    loop {
        if let ServerMessage::LevelDoc { name, .. } = next(&mut ws).await {
            assert_eq!(name, "m01_car");
            break;
        }
    }
}

#[tokio::test]
async fn sessions_are_isolated_and_exclusive() {
    let addr = start(Duration::from_secs(5), None).await;
    let mut a = connect(addr, None).await;
    let mut b = connect(addr, None).await;
    let (ida, idb) = (hello(&mut a).await, hello(&mut b).await);
    assert_ne!(ida, idb);
    send(&mut a, json!({"type": "generate", "size": "S", "seed": 3})).await;
    loop {
        if next_frame(&mut a).await.level != "m01_car" {
            break;
        }
    }
    assert_eq!(next_frame(&mut b).await.level, "m01_car");

    let mut intruder = connect(addr, Some(&ida)).await;
    match next(&mut intruder).await {
        ServerMessage::Error { code, .. } => assert_eq!(code, "session_busy"),
        other => panic!("{other:?}"),
    }
    next_frame(&mut a).await;
}

#[tokio::test]
async fn sessions_survive_a_short_disconnect() {
    let addr = start(Duration::from_millis(400), None).await;
    let mut ws = connect(addr, None).await;
    let id = hello(&mut ws).await;
    let mut tick = 0;
    while tick < 5 {
        tick = next_frame(&mut ws).await.tick;
    }
    ws.close(None).await.unwrap();
    tokio::time::sleep(Duration::from_millis(100)).await;

    let mut again = connect(addr, Some(&id)).await;
    assert_eq!(hello(&mut again).await, id);
    assert!(next_frame(&mut again).await.tick >= tick);
    again.close(None).await.unwrap();

    tokio::time::sleep(Duration::from_millis(900)).await;
    let mut late = connect(addr, Some(&id)).await;
    match next(&mut late).await {
        ServerMessage::Error { code, .. } => assert_eq!(code, "unknown_session"),
        other => panic!("{other:?}"),
    }
}

#[tokio::test]
async fn static_assets_are_served() {
    let dir = std::env::temp_dir().join(format!("impulse2d-play-assets-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<title>impulse2d</title>").unwrap();
    let addr = start(Duration::from_secs(1), Some(dir)).await;
    let mut stream = TcpStream::connect(addr).await.unwrap();
    stream.write_all(b"GET /index.html HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").await.unwrap();
    let mut body = String::new();
    stream.read_to_string(&mut body).await.unwrap();
    assert!(body.starts_with("HTTP/1.1 200"), "{body}");
    assert!(body.ends_with("<title>impulse2d</title>"));
}
