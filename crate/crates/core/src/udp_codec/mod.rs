//! Ethernet/IPv4/UDP framing as seen by a hardware UDP/IP core.
//!
//! Frames are carried as fixed-width datapath words, one word per clock.
//! Preamble, start-of-frame delimiter, FCS and inter-packet gap belong to the
//! MAC and are not part of the encoded bytes. Frames are never padded or
//! segmented: one payload of at most [`MAX_PAYLOAD`] bytes per frame.

mod arp;
mod checksum;
mod datapath;
mod frame;
mod pcap;

use std::fmt;
use std::net::Ipv4Addr;

pub use arp::{
    ArpCache, ArpEndpoint, ArpOp, ArpPacket, Resolution, ARP_CACHE_CAPACITY, ARP_PACKET_BYTES,
};
pub use checksum::{internet_checksum, ipv4_header_checksum, ones_complement_sum, udp_checksum};
pub use datapath::{DatapathConfig, DatapathFrame, RateClass, LINE_OVERHEAD_BYTES};
pub use frame::{decode_bytes, decode_frame, encode_bytes, encode_frame, Decoded, UdpFrame};
pub use pcap::{PcapWriter, PCAP_LINKTYPE_ETHERNET, PCAP_MAGIC, PCAP_SNAPLEN};

pub const ETH_HEADER_BYTES: usize = 14;
pub const VLAN_TAG_BYTES: usize = 4;
pub const IPV4_HEADER_BYTES: usize = 20;
pub const UDP_HEADER_BYTES: usize = 8;
pub const MTU: usize = 1500;
/// Largest UDP payload that fits one unfragmented frame.
pub const MAX_PAYLOAD: usize = MTU - IPV4_HEADER_BYTES - UDP_HEADER_BYTES;

pub const ETHERTYPE_IPV4: u16 = 0x0800;
pub const ETHERTYPE_ARP: u16 = 0x0806;
pub const ETHERTYPE_VLAN: u16 = 0x8100;
pub const IP_PROTO_UDP: u8 = 17;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("payload of {0} bytes exceeds {MAX_PAYLOAD}; segmentation is not supported")]
    PayloadTooLarge(usize),
    #[error("frame truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("unsupported ethertype {0:#06x}")]
    UnsupportedEthertype(u16),
    #[error("unsupported IP protocol {0}")]
    UnsupportedProtocol(u8),
    #[error("IPv4 header checksum mismatch")]
    Ipv4Checksum,
    #[error("UDP checksum mismatch")]
    UdpChecksum,
    #[error("IP version {0} is not 4")]
    IpVersion(u8),
    #[error("IP options are not supported (IHL {0})")]
    IpOptions(u8),
    #[error("fragmented datagrams are not supported")]
    Fragmented,
    #[error("inconsistent length field: {0}")]
    Length(String),
    #[error("malformed ARP packet: {0}")]
    Arp(String),
    #[error("word stream: {0}")]
    Words(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MacAddr(pub [u8; 6]);

impl MacAddr {
    pub const BROADCAST: MacAddr = MacAddr([0xff; 6]);
    pub const ZERO: MacAddr = MacAddr([0; 6]);
}

impl fmt::Display for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.0;
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            b[0], b[1], b[2], b[3], b[4], b[5]
        )
    }
}

/// 802.1Q tag control information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VlanTag {
    pub tci: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EthernetHeader {
    pub dst: MacAddr,
    pub src: MacAddr,
    /// Parsed on decode, never emitted.
    pub vlan: Option<VlanTag>,
    pub ethertype: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ipv4Header {
    pub version: u8,
    /// In 32-bit words.
    pub header_length: u8,
    pub dscp: u8,
    pub ecn: u8,
    pub total_length: u16,
    pub identification: u16,
    /// The three flag bits, `0b010` being don't-fragment.
    pub flags: u8,
    pub fragment_offset: u16,
    pub ttl: u8,
    pub protocol: u8,
    pub header_checksum: u16,
    pub src: Ipv4Addr,
    pub dst: Ipv4Addr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UdpHeader {
    pub src_port: u16,
    pub dst_port: u16,
    pub length: u16,
    pub checksum: u16,
}

/// Every header field of a decoded or encoded frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeaders {
    pub eth: EthernetHeader,
    pub ipv4: Ipv4Header,
    pub udp: UdpHeader,
}

impl FrameHeaders {
    /// The caller-chosen fields, dropping lengths and checksums.
    pub fn config(&self) -> HeaderConfig {
        HeaderConfig {
            src_mac: self.eth.src,
            dst_mac: self.eth.dst,
            src_ip: self.ipv4.src,
            dst_ip: self.ipv4.dst,
            src_port: self.udp.src_port,
            dst_port: self.udp.dst_port,
            dscp: self.ipv4.dscp,
            identification: self.ipv4.identification,
            ttl: self.ipv4.ttl,
            dont_fragment: self.ipv4.flags & 0b010 != 0,
        }
    }
}

/// Fields a sender chooses; lengths and checksums are derived on encode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeaderConfig {
    pub src_mac: MacAddr,
    pub dst_mac: MacAddr,
    pub src_ip: Ipv4Addr,
    pub dst_ip: Ipv4Addr,
    pub src_port: u16,
    pub dst_port: u16,
    pub dscp: u8,
    pub identification: u16,
    pub ttl: u8,
    pub dont_fragment: bool,
}

impl Default for HeaderConfig {
    fn default() -> Self {
        HeaderConfig {
            src_mac: MacAddr::ZERO,
            dst_mac: MacAddr::ZERO,
            src_ip: Ipv4Addr::UNSPECIFIED,
            dst_ip: Ipv4Addr::UNSPECIFIED,
            src_port: 0,
            dst_port: 0,
            dscp: 0,
            identification: 0,
            ttl: 64,
            dont_fragment: true,
        }
    }
}
