//! OSC 1.0 encoding and UDP delivery of `/dirt/play` messages.

use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};

use crate::controls::ControlValue;
use crate::scheduler::{Sink, SinkError, TimedEvent};

pub const DEFAULT_TARGET: &str = "127.0.0.1:57120";

/// The timetag meaning "now".
pub const IMMEDIATE: u64 = 1;

/// Seconds from the NTP epoch (1900) to the Unix epoch (1970).
pub const NTP_UNIX_OFFSET: u64 = 2_208_988_800;

#[derive(Debug, Clone, PartialEq)]
pub enum OscArg {
    Int(i32),
    Float(f32),
    Str(String),
    Double(f64),
}

impl OscArg {
    pub fn tag(&self) -> char {
        match self {
            OscArg::Int(_) => 'i',
            OscArg::Float(_) => 'f',
            OscArg::Str(_) => 's',
            OscArg::Double(_) => 'd',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscMessage {
    pub address: String,
    pub args: Vec<OscArg>,
}

impl OscMessage {
    pub fn new(address: impl Into<String>, args: Vec<OscArg>) -> Self {
        OscMessage {
            address: address.into(),
            args,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OscPacket {
    Message(OscMessage),
    Bundle { timetag: u64, elements: Vec<OscPacket> },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodeError {
    #[error("OSC address must start with '/', got {0:?}")]
    Address(String),
    #[error("OSC strings may not contain NUL: {0:?}")]
    Nul(String),
    #[error("control '{key}' has a value OSC cannot carry: {value}")]
    Unsupported { key: String, value: String },
}

fn push_str(out: &mut Vec<u8>, s: &str) -> Result<(), EncodeError> {
    if s.contains('\0') {
        return Err(EncodeError::Nul(s.to_string()));
    }
    out.extend_from_slice(s.as_bytes());
    // At least one NUL, then pad to a multiple of four.
    let pad = 4 - s.len() % 4;
    out.extend(std::iter::repeat_n(0u8, pad));
    Ok(())
}

pub fn encode_message(m: &OscMessage) -> Result<Vec<u8>, EncodeError> {
    if !m.address.starts_with('/') {
        return Err(EncodeError::Address(m.address.clone()));
    }
    let mut out = Vec::new();
    push_str(&mut out, &m.address)?;
    let tags: String = std::iter::once(',').chain(m.args.iter().map(OscArg::tag)).collect();
    push_str(&mut out, &tags)?;
    for arg in &m.args {
        match arg {
            OscArg::Int(i) => out.extend_from_slice(&i.to_be_bytes()),
            OscArg::Float(x) => out.extend_from_slice(&x.to_be_bytes()),
            OscArg::Double(x) => out.extend_from_slice(&x.to_be_bytes()),
            OscArg::Str(s) => push_str(&mut out, s)?,
        }
    }
    Ok(out)
}

pub fn encode_bundle(timetag: u64, elements: &[OscPacket]) -> Result<Vec<u8>, EncodeError> {
    let mut out = b"#bundle\0".to_vec();
    out.extend_from_slice(&timetag.to_be_bytes());
    for element in elements {
        let bytes = encode(element)?;
        out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
        out.extend_from_slice(&bytes);
    }
    Ok(out)
}

pub fn encode(p: &OscPacket) -> Result<Vec<u8>, EncodeError> {
    match p {
        OscPacket::Message(m) => encode_message(m),
        OscPacket::Bundle { timetag, elements } => encode_bundle(*timetag, elements),
    }
}

/// Unix seconds as a 32.32 fixed-point NTP timetag. Times before the NTP
/// epoch clamp to zero.
pub fn ntp(unix_seconds: f64) -> u64 {
    let t = unix_seconds + NTP_UNIX_OFFSET as f64;
    if t.is_nan() || t <= 0.0 {
        return 0;
    }
    let secs = t.floor();
    if secs >= u32::MAX as f64 + 1.0 {
        return u64::MAX;
    }
    let frac = ((t - secs) * 4_294_967_296.0).floor().min(u32::MAX as f64);
    ((secs as u64) << 32) | frac as u64
}

fn control_arg(key: &str, value: &ControlValue) -> Result<OscArg, EncodeError> {
    let unsupported = || EncodeError::Unsupported {
        key: key.to_string(),
        value: value.to_string(),
    };
    match value {
        ControlValue::Int(i) => i32::try_from(*i).map(OscArg::Int).map_err(|_| unsupported()),
        ControlValue::Float(x) => {
            let f = *x as f32;
            if f.is_finite() {
                Ok(OscArg::Float(f))
            } else {
                Err(unsupported())
            }
        }
        ControlValue::Text(s) if s.contains('\0') => Err(unsupported()),
        ControlValue::Text(s) => Ok(OscArg::Str(s.clone())),
    }
}

/// A `/dirt/play` message bundled at the event's send time. Arguments are
/// `cps`, `delta`, `cycle`, then the controls in insertion order.
pub fn to_dirt_message(e: &TimedEvent, cps: f64) -> Result<OscPacket, EncodeError> {
    let mut args = vec![
        OscArg::Str("cps".into()),
        OscArg::Float(cps as f32),
        OscArg::Str("delta".into()),
        OscArg::Float(e.duration as f32),
        OscArg::Str("cycle".into()),
        OscArg::Float(e.cycle.to_f64() as f32),
    ];
    for (key, value) in e.controls.iter() {
        if key.contains('\0') {
            return Err(EncodeError::Nul(key.clone()));
        }
        let arg = control_arg(key, value)?;
        args.push(OscArg::Str(key.clone()));
        args.push(arg);
    }
    Ok(OscPacket::Bundle {
        timetag: ntp(e.at_time),
        elements: vec![OscPacket::Message(OscMessage::new("/dirt/play", args))],
    })
}

/// Sends each packet as one UDP datagram.
pub struct OscSender {
    socket: UdpSocket,
    target: SocketAddr,
}

impl OscSender {
    pub fn new(target: &str) -> std::io::Result<Self> {
        let target = target.to_socket_addrs()?.next().ok_or_else(|| {
            std::io::Error::new(std::io::ErrorKind::InvalidInput, format!("cannot resolve {target}"))
        })?;
        let bind: SocketAddr = if target.is_ipv4() {
            "0.0.0.0:0".parse().expect("literal address")
        } else {
            "[::]:0".parse().expect("literal address")
        };
        Ok(OscSender {
            socket: UdpSocket::bind(bind)?,
            target,
        })
    }

    pub fn target(&self) -> SocketAddr {
        self.target
    }

    pub fn send(&self, packet: &OscPacket) -> Result<(), SinkError> {
        let bytes = encode(packet)?;
        self.socket.send_to(&bytes, self.target)?;
        Ok(())
    }
}

impl Sink for OscSender {
    fn send(&mut self, event: &TimedEvent, cps: f64) -> Result<(), SinkError> {
        OscSender::send(self, &to_dirt_message(event, cps)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controls::ControlMap;
    use crate::time::Fraction;

    #[test]
    fn empty_message() {
        let bytes = encode_message(&OscMessage::new("/x", vec![])).unwrap();
        assert_eq!(bytes, [0x2F, 0x78, 0x00, 0x00, 0x2C, 0x00, 0x00, 0x00]);
    }

    #[test]
    fn immediate_empty_bundle() {
        let bytes = encode_bundle(IMMEDIATE, &[]).unwrap();
        assert_eq!(&bytes[..8], b"#bundle\0");
        assert_eq!(&bytes[8..], [0, 0, 0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn four_byte_strings_get_a_full_pad_word() {
        let bytes = encode_message(&OscMessage::new("/abc", vec![])).unwrap();
        assert_eq!(bytes.len(), 12);
        assert_eq!(&bytes[4..8], [0, 0, 0, 0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(encode_message(&OscMessage::new("x", vec![])), Err(EncodeError::Address(_))));
        let nul = OscMessage::new("/x", vec![OscArg::Str("a\0b".into())]);
        assert!(matches!(encode_message(&nul), Err(EncodeError::Nul(_))));
    }

    #[test]
    fn ntp_offsets() {
        assert_eq!(ntp(0.0), NTP_UNIX_OFFSET << 32);
        assert_eq!(ntp(1.5), ((NTP_UNIX_OFFSET + 1) << 32) | 0x8000_0000);
        assert_eq!(ntp(-1e12), 0);
    }

    fn event(controls: ControlMap) -> TimedEvent {
        TimedEvent {
            at_time: 0.0,
            duration: 2.0,
            controls,
            cycle: Fraction::zero(),
        }
    }

    fn message_args(p: OscPacket) -> Vec<OscArg> {
        let OscPacket::Bundle { mut elements, .. } = p else { panic!() };
        let Some(OscPacket::Message(m)) = elements.pop() else { panic!() };
        assert_eq!(m.address, "/dirt/play");
        m.args
    }

    #[test]
    fn dirt_message_layout() {
        let args = message_args(to_dirt_message(&event(ControlMap::single("sound", "bd")), 0.5).unwrap());
        assert_eq!(
            args,
            vec![
                OscArg::Str("cps".into()),
                OscArg::Float(0.5),
                OscArg::Str("delta".into()),
                OscArg::Float(2.0),
                OscArg::Str("cycle".into()),
                OscArg::Float(0.0),
                OscArg::Str("sound".into()),
                OscArg::Str("bd".into()),
            ]
        );
        let args = message_args(to_dirt_message(&event(ControlMap::single("n", 3i64)), 0.5).unwrap());
        assert_eq!(args[7], OscArg::Int(3));
        assert_eq!(message_args(to_dirt_message(&event(ControlMap::new()), 0.5).unwrap()).len(), 6);
    }

    #[test]
    fn unsupported_values_name_the_key() {
        let err = to_dirt_message(&event(ControlMap::single("n", i64::MAX)), 0.5).unwrap_err();
        assert!(err.to_string().contains("'n'"), "{err}");
        let err = to_dirt_message(&event(ControlMap::single("speed", 1e300)), 0.5).unwrap_err();
        assert!(err.to_string().contains("'speed'"), "{err}");
    }

    #[test]
    fn udp_round_trip() {
        let receiver = UdpSocket::bind("127.0.0.1:0").unwrap();
        receiver
            .set_read_timeout(Some(std::time::Duration::from_secs(5)))
            .unwrap();
        let sender = OscSender::new(&receiver.local_addr().unwrap().to_string()).unwrap();
        let packet = OscPacket::Message(OscMessage::new("/x", vec![OscArg::Int(7)]));
        sender.send(&packet).unwrap();
        let mut buf = [0u8; 64];
        let n = receiver.recv(&mut buf).unwrap();
        assert_eq!(&buf[..n], encode(&packet).unwrap().as_slice());
    }
}
