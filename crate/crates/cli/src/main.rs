//! `tylr`: batch parsing, relation dumps, coherence checks, scripted and
//! served editing sessions, and benchmarks over a grammar file.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use clap::{Parser as ClapParser, Subcommand, ValueEnum};
use serde_json::Value;
use tokio::sync::{mpsc, oneshot};
use tylr_core::bench::{run_bench, DEFAULT_SIZES};
use tylr_core::editor::{parse_event_line, Editor, Session};
use tylr_core::elab::Elab;
use tylr_core::molder::{parse_source, MoldedParse};
use tylr_core::parser::token_text;
use tylr_core::relations::{check_coherence, dump_dot, dump_tsv, lemma_violations, RelationTable};
use tylr_core::{load_grammar, validate, Pbg};

#[derive(ClapParser)]
#[command(name = "tylr", version, about = "Error-correcting operator-precedence parsing and structure editing")]
struct Cli {
    /// Grammar file (JSON).
    #[arg(long, global = true, env = "TYLR_GRAMMAR")]
    grammar: Option<PathBuf>,
    /// ASCII glyphs for grout and holes.
    #[arg(long, global = true)]
    ascii: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Debug,
}

#[derive(Subcommand)]
enum Command {
    /// Molds and parses source text, completing it with obligations.
    Parse {
        /// Source file; standard input when absent.
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// One JSON line per molding decision on standard error.
        #[arg(long)]
        trace: bool,
    },
    /// Dumps the precedence relation table.
    Relations {
        #[arg(long)]
        dot: bool,
    },
    /// Dumps the elaborated, grout-injected productions.
    Elab,
    /// Checks tile relations against declared precedences, and the structural lemmas.
    Coherence,
    /// Replays an event script, printing one render model per state.
    Session {
        /// Event JSON lines; standard input when absent.
        script: Option<PathBuf>,
    },
    /// Speaks the session protocol on standard input and output, or over
    /// WebSocket with `--port`.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
    /// Times batch parsing and editing on generated programs; prints CSV.
    Bench {
        /// Program sizes in tokens.
        #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = DEFAULT_SIZES)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(path: Option<&Path>) -> Result<Pbg> {
    let path = path.context("no grammar given: pass --grammar PATH or set TYLR_GRAMMAR")?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = load_grammar(&text).with_context(|| format!("loading {}", path.display()))?;
    let violations = validate(&g);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        bail!("grammar {} is invalid:\n{}", path.display(), lines.join("\n"));
    }
    Ok(g)
}

/// Writes to standard output; a closed pipe surfaces as an error, not a panic.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => std::io::read_to_string(std::io::stdin()).context("reading standard input"),
    }
}

/// The completed term as text, with unmolded tokens shown where they were typed.
fn text_with_unmolded(r: &MoldedParse, src_tokens: &[(usize, String)], ascii: bool) -> String {
    // Unmolded tokens, keyed by how many molded tokens precede them.
    let mut unmolded: Vec<(usize, &str)> = Vec::new();
    let mut molded = 0;
    let mut u = r.unmolded.iter().peekable();
    for (at, _) in src_tokens {
        match u.peek() {
            Some((uat, text)) if uat == at => {
                unmolded.push((molded, text.as_str()));
                u.next();
            }
            _ => molded += 1,
        }
    }
    let mut out: Vec<String> = Vec::new();
    let mut seen = 0;
    let mut pending = unmolded.into_iter().peekable();
    let mut flush = |seen: usize, out: &mut Vec<String>| {
        while let Some((_, text)) = pending.next_if(|(k, _)| *k <= seen) {
            out.push(format!("!{text}!"));
        }
    };
    flush(0, &mut out);
    for t in r.term.tokens() {
        out.push(token_text(t, ascii));
        if t.is_solid_tile() {
            seen += 1;
            flush(seen, &mut out);
        }
    }
    flush(usize::MAX, &mut out);
    out.join(" ")
}

fn cmd_parse(g: &Pbg, input: Option<&Path>, format: Format, trace: bool, ascii: bool) -> Result<()> {
    let ed = Editor::new(g);
    let src = read_input(input)?;
    let r = parse_source(&ed.parser, &ed.lexer, &src, trace);
    if trace {
        let mut err = std::io::stderr().lock();
        for line in &r.trace {
            writeln!(err, "{line}")?;
        }
    }
    match format {
        Format::Text => emit(&format!("{}\n", text_with_unmolded(&r, &ed.lexer.lex(&src), ascii))),
        Format::Json => emit(&format!("{}\n", serde_json::to_string_pretty(&r.term.to_json(g))?)),
        Format::Debug => {
            let (_, stacks) = ed.parser.parse_trace(&r.tokens);
            let pushed = r.tokens.iter().map(|t| t.text.as_str()).chain(std::iter::once("⧐"));
            let mut out = String::new();
            for (text, k) in pushed.zip(&stacks) {
                out.push_str(&format!("{text}\t{}\n", k.show()));
            }
            out.push_str(&format!("{}\n", r.term.to_text(ascii)));
            emit(&out)
        }
    }
}

fn cmd_coherence(g: &Pbg) -> Result<()> {
    let failures = check_coherence(g);
    let violations = lemma_violations(&RelationTable::new(g));
    let mut out = String::new();
    for f in &failures {
        out.push_str(&format!("coherence: {}\n", f.show(g)));
    }
    for v in &violations {
        out.push_str(&format!("lemma {}: {:?}\n", v.lemma, v.step));
    }
    if failures.is_empty() && violations.is_empty() {
        emit("coherent; 0 lemma violations\n")
    } else {
        emit(&out)?;
        bail!("{} coherence failures, {} lemma violations", failures.len(), violations.len())
    }
}

fn cmd_session(g: &Pbg, script: Option<&Path>) -> Result<()> {
    let ed = Editor::new(g);
    let text = read_input(script)?;
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        events.push(parse_event_line(line).map_err(|e| anyhow::anyhow!("line {}: {e}", i + 1))?);
    }
    let mut out = std::io::stdout().lock();
    for model in ed.run_script(&events) {
        writeln!(out, "{}", model.to_json())?;
    }
    Ok(())
}

fn serve_stdio(g: &Pbg) -> Result<()> {
    let ed = Editor::new(g);
    let mut session = Session::new(&ed);
    let mut out = std::io::stdout().lock();
    for line in std::io::stdin().lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(out, "{}", session.handle_line(&line))?;
        out.flush()?;
    }
    Ok(())
}

type Request = (String, oneshot::Sender<Value>);

/// Runs one session on its own thread; edit states are not `Send`.
fn session_thread(ed: Arc<Editor>) -> mpsc::UnboundedSender<Request> {
    let (tx, mut rx) = mpsc::unbounded_channel::<Request>();
    std::thread::spawn(move || {
        let mut session = Session::new(&ed);
        while let Some((line, reply)) = rx.blocking_recv() {
            let _ = reply.send(session.handle_line(&line));
        }
    });
    tx
}

async fn ws_handler(ws: WebSocketUpgrade, State(ed): State<Arc<Editor>>) -> Response {
    ws.on_upgrade(move |socket| ws_session(socket, ed))
}

async fn ws_session(mut socket: WebSocket, ed: Arc<Editor>) {
    let session = session_thread(ed);
    while let Some(Ok(msg)) = socket.recv().await {
        let text = match msg {
            Message::Text(t) => t.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (reply_tx, reply_rx) = oneshot::channel();
            if session.send((line.to_string(), reply_tx)).is_err() {
                return;
            }
            let Ok(reply) = reply_rx.await else { return };
            if socket.send(Message::Text(reply.to_string().into())).await.is_err() {
                return;
            }
        }
    }
}

fn serve_ws(g: &Pbg, port: u16) -> Result<()> {
    let ed = Arc::new(Editor::new(g));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let app = Router::new().route("/", get(ws_handler)).route("/ws", get(ws_handler)).with_state(ed);
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        eprintln!("listening on ws://{}", listener.local_addr()?);
        axum::serve(listener, app).await?;
        Ok(())
    })
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<()> {
        let g = load(cli.grammar.as_deref())?;
        match &cli.command {
            Command::Parse { input, format, trace } => cmd_parse(&g, input.as_deref(), *format, *trace, cli.ascii),
            Command::Relations { dot } => {
                let table = RelationTable::new(&g);
                emit(&if *dot { dump_dot(&table) } else { dump_tsv(&table) })
            }
            Command::Elab => emit(&Elab::new(&g).dump_cfg()),
            Command::Coherence => cmd_coherence(&g),
            Command::Session { script } => cmd_session(&g, script.as_deref()),
            Command::Serve { port: None } => serve_stdio(&g),
            Command::Serve { port: Some(p) } => serve_ws(&g, *p),
            Command::Bench { sizes, seed } => emit(&run_bench(&g, sizes, *seed).to_csv()),
        }
    };
    match run() {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => {
            std::process::ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
