//! An OSC 1.0 decoder for round-trip tests.

use riptide_core::osc::{OscArg, OscMessage, OscPacket};

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or_else(|| format!("truncated at byte {}", self.pos))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn word(&mut self) -> Result<[u8; 4], String> {
        Ok(self.take(4)?.try_into().expect("four bytes"))
    }

    fn string(&mut self) -> Result<String, String> {
        let rest = &self.bytes[self.pos..];
        let len = rest.iter().position(|b| *b == 0).ok_or("unterminated string")?;
        let text = std::str::from_utf8(&rest[..len]).map_err(|e| e.to_string())?.to_string();
        let padded = (len / 4 + 1) * 4;
        let pad = self.take(padded)?;
        if pad[len..].iter().any(|b| *b != 0) {
            return Err("non-zero string padding".into());
        }
        Ok(text)
    }
}

pub fn decode(bytes: &[u8]) -> Result<OscPacket, String> {
    if !bytes.len().is_multiple_of(4) {
        return Err(format!("length {} is not a multiple of 4", bytes.len()));
    }
    let mut r = Reader { bytes, pos: 0 };
    if bytes.starts_with(b"#bundle\0") {
        r.take(8)?;
        let timetag = u64::from_be_bytes(r.take(8)?.try_into().expect("eight bytes"));
        let mut elements = Vec::new();
        while r.pos < bytes.len() {
            let len = u32::from_be_bytes(r.word()?) as usize;
            elements.push(decode(r.take(len)?)?);
        }
        return Ok(OscPacket::Bundle { timetag, elements });
    }
    let address = r.string()?;
    let tags = r.string()?;
    let tags = tags.strip_prefix(',').ok_or("type tag string must start with ','")?;
    let mut args = Vec::new();
    for tag in tags.chars() {
        args.push(match tag {
            'i' => OscArg::Int(i32::from_be_bytes(r.word()?)),
            'f' => OscArg::Float(f32::from_be_bytes(r.word()?)),
            'd' => OscArg::Double(f64::from_be_bytes(r.take(8)?.try_into().expect("eight bytes"))),
            's' => OscArg::Str(r.string()?),
            other => return Err(format!("unsupported type tag {other:?}")),
        });
    }
    if r.pos != bytes.len() {
        return Err("trailing bytes after message".into());
    }
    Ok(OscPacket::Message(OscMessage { address, args }))
}
