//! Event-stream serialization.
//!
//! Text: an optional `# duration_ps=<n> seed=<n>` line, a `channel,timestamp_ps`
//! header, then one `channel,timestamp` row per event with channel `0`
//! (signal) or `1` (idler), merged in time order.
//!
//! Binary: packed 9-byte records, a channel byte followed by the timestamp
//! as a little-endian `i64`, in the same order. No header.

use std::io::{self, BufRead, Read, Write};

use super::{Channel, EventStream};

pub const TEXT_HEADER: &str = "channel,timestamp_ps";
pub const RECORD_BYTES: usize = 9;

/// Events of both streams in time order; signals first on ties.
fn merged<'a>(signal: &'a EventStream, idler: &'a EventStream) -> impl Iterator<Item = (Channel, i64)> + 'a {
    let (s, i) = (&signal.timestamps_ps, &idler.timestamps_ps);
    let (mut a, mut b) = (0, 0);
    std::iter::from_fn(move || {
        let take_signal = match (s.get(a), i.get(b)) {
            (Some(x), Some(y)) => x <= y,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => return None,
        };
        if take_signal {
            a += 1;
            Some((Channel::Signal, s[a - 1]))
        } else {
            b += 1;
            Some((Channel::Idler, i[b - 1]))
        }
    })
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

fn split(events: Vec<(Channel, i64)>, duration_ps: i64, seed: u64) -> (EventStream, EventStream) {
    let mut signal = EventStream::empty(Channel::Signal, duration_ps, seed);
    let mut idler = EventStream::empty(Channel::Idler, duration_ps, seed);
    for (c, t) in events {
        match c {
            Channel::Signal => signal.timestamps_ps.push(t),
            Channel::Idler => idler.timestamps_ps.push(t),
        }
    }
    signal.timestamps_ps.sort_unstable();
    idler.timestamps_ps.sort_unstable();
    (signal, idler)
}

pub fn write_text<W: Write>(mut w: W, signal: &EventStream, idler: &EventStream) -> io::Result<()> {
    writeln!(w, "# duration_ps={} seed={}", signal.duration_ps, signal.seed)?;
    writeln!(w, "{TEXT_HEADER}")?;
    for (c, t) in merged(signal, idler) {
        writeln!(w, "{},{t}", c.code())?;
    }
    w.flush()
}

/// Reads the text format. Without a metadata comment the duration is one
/// picosecond past the last event and the seed is zero.
pub fn read_text<R: BufRead>(r: R) -> io::Result<(EventStream, EventStream)> {
    let mut duration = None;
    let mut seed = 0;
    let mut events = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            for kv in meta.split_whitespace() {
                match kv.split_once('=') {
                    Some(("duration_ps", v)) => {
                        duration = Some(
                            v.parse()
                                .map_err(|e| invalid(format!("line {}: duration_ps: {e}", n + 1)))?,
                        )
                    }
                    Some(("seed", v)) => seed = v.parse().map_err(|e| invalid(format!("line {}: seed: {e}", n + 1)))?,
                    _ => {}
                }
            }
            continue;
        }
        if line == TEXT_HEADER {
            continue;
        }
        let (c, t) = line
            .split_once(',')
            .ok_or_else(|| invalid(format!("line {}: expected channel,timestamp_ps", n + 1)))?;
        let channel = c
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(Channel::from_code)
            .ok_or_else(|| invalid(format!("line {}: unknown channel {c:?}", n + 1)))?;
        let t: i64 = t
            .trim()
            .parse()
            .map_err(|e| invalid(format!("line {}: timestamp: {e}", n + 1)))?;
        events.push((channel, t));
    }
    let duration = duration.unwrap_or_else(|| events.iter().map(|e| e.1 + 1).max().unwrap_or(0));
    Ok(split(events, duration, seed))
}

pub fn write_binary<W: Write>(mut w: W, signal: &EventStream, idler: &EventStream) -> io::Result<()> {
    let mut rec = [0u8; RECORD_BYTES];
    for (c, t) in merged(signal, idler) {
        rec[0] = c.code();
        rec[1..].copy_from_slice(&t.to_le_bytes());
        w.write_all(&rec)?;
    }
    w.flush()
}

/// Reads packed records. The format carries no metadata, so the caller
/// supplies duration and seed.
pub fn read_binary<R: Read>(mut r: R, duration_ps: i64, seed: u64) -> io::Result<(EventStream, EventStream)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % RECORD_BYTES != 0 {
        return Err(invalid(format!(
            "binary event file length {} is not a multiple of {RECORD_BYTES}",
            bytes.len()
        )));
    }
    let mut events = Vec::with_capacity(bytes.len() / RECORD_BYTES);
    for (n, rec) in bytes.chunks_exact(RECORD_BYTES).enumerate() {
        let channel =
            Channel::from_code(rec[0]).ok_or_else(|| invalid(format!("record {n}: unknown channel {}", rec[0])))?;
        let t = i64::from_le_bytes(rec[1..].try_into().expect("8-byte slice"));
        events.push((channel, t));
    }
    Ok(split(events, duration_ps, seed))
}
