//! Classic libpcap capture files, little-endian, microsecond timestamps.
//!
//! Record `i` is stamped `i` microseconds after the epoch so captures of the
//! same frames are byte-identical.

use std::io::Write;

pub const PCAP_MAGIC: u32 = 0xa1b2_c3d4;
pub const PCAP_SNAPLEN: u32 = 65535;
pub const PCAP_LINKTYPE_ETHERNET: u32 = 1;

pub struct PcapWriter<W: Write> {
    out: W,
    records: u64,
}

impl<W: Write> PcapWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        out.write_all(&PCAP_MAGIC.to_le_bytes())?;
        out.write_all(&2u16.to_le_bytes())?;
        out.write_all(&4u16.to_le_bytes())?;
        out.write_all(&0i32.to_le_bytes())?;
        out.write_all(&0u32.to_le_bytes())?;
        out.write_all(&PCAP_SNAPLEN.to_le_bytes())?;
        out.write_all(&PCAP_LINKTYPE_ETHERNET.to_le_bytes())?;
        Ok(PcapWriter { out, records: 0 })
    }

    pub fn write_frame(&mut self, frame: &[u8]) -> std::io::Result<()> {
        let ts_sec = (self.records / 1_000_000) as u32;
        let ts_usec = (self.records % 1_000_000) as u32;
        let caplen = frame.len().min(PCAP_SNAPLEN as usize);
        self.out.write_all(&ts_sec.to_le_bytes())?;
        self.out.write_all(&ts_usec.to_le_bytes())?;
        self.out.write_all(&(caplen as u32).to_le_bytes())?;
        self.out.write_all(&(frame.len() as u32).to_le_bytes())?;
        self.out.write_all(&frame[..caplen])?;
        self.records += 1;
        Ok(())
    }

    pub fn records(&self) -> u64 {
        self.records
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}
