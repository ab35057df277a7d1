//! ARP over Ethernet and the 256-entry IP-to-MAC cache.
//!
//! When full, the cache evicts the entry inserted longest ago. Re-learning
//! an address already present updates its MAC in place and keeps its age.

use std::collections::{HashMap, VecDeque};
use std::net::Ipv4Addr;

use super::{CodecError, MacAddr, ETHERTYPE_ARP, ETHERTYPE_IPV4};

pub const ARP_CACHE_CAPACITY: usize = 256;
pub const ARP_PACKET_BYTES: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArpOp {
    Request = 1,
    Reply = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArpPacket {
    pub op: ArpOp,
    pub sender_mac: MacAddr,
    pub sender_ip: Ipv4Addr,
    pub target_mac: MacAddr,
    pub target_ip: Ipv4Addr,
}

impl ArpPacket {
    pub fn to_bytes(&self) -> [u8; ARP_PACKET_BYTES] {
        let mut b = [0u8; ARP_PACKET_BYTES];
        b[0..2].copy_from_slice(&1u16.to_be_bytes());
        b[2..4].copy_from_slice(&ETHERTYPE_IPV4.to_be_bytes());
        b[4] = 6;
        b[5] = 4;
        b[6..8].copy_from_slice(&(self.op as u16).to_be_bytes());
        b[8..14].copy_from_slice(&self.sender_mac.0);
        b[14..18].copy_from_slice(&self.sender_ip.octets());
        b[18..24].copy_from_slice(&self.target_mac.0);
        b[24..28].copy_from_slice(&self.target_ip.octets());
        b
    }

    pub fn parse(b: &[u8]) -> Result<Self, CodecError> {
        if b.len() < ARP_PACKET_BYTES {
            return Err(CodecError::Truncated {
                needed: ARP_PACKET_BYTES,
                available: b.len(),
            });
        }
        if b[0..2] != [0, 1] || b[2..4] != ETHERTYPE_IPV4.to_be_bytes() || b[4] != 6 || b[5] != 4 {
            return Err(CodecError::Arp("not Ethernet/IPv4".into()));
        }
        let op = match u16::from_be_bytes([b[6], b[7]]) {
            1 => ArpOp::Request,
            2 => ArpOp::Reply,
            other => return Err(CodecError::Arp(format!("operation {other}"))),
        };
        let mac = |at: usize| MacAddr(b[at..at + 6].try_into().unwrap());
        let ip = |at: usize| Ipv4Addr::new(b[at], b[at + 1], b[at + 2], b[at + 3]);
        Ok(ArpPacket {
            op,
            sender_mac: mac(8),
            sender_ip: ip(14),
            target_mac: mac(18),
            target_ip: ip(24),
        })
    }

    /// Ethernet frame carrying this packet. Requests go to broadcast.
    pub fn to_frame(&self) -> Vec<u8> {
        let dst = match self.op {
            ArpOp::Request => MacAddr::BROADCAST,
            ArpOp::Reply => self.target_mac,
        };
        let mut f = Vec::with_capacity(14 + ARP_PACKET_BYTES);
        f.extend_from_slice(&dst.0);
        f.extend_from_slice(&self.sender_mac.0);
        f.extend_from_slice(&ETHERTYPE_ARP.to_be_bytes());
        f.extend_from_slice(&self.to_bytes());
        f
    }
}

#[derive(Debug, Clone, Default)]
pub struct ArpCache {
    entries: HashMap<Ipv4Addr, MacAddr>,
    order: VecDeque<Ipv4Addr>,
}

impl ArpCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, ip: Ipv4Addr) -> Option<MacAddr> {
        self.entries.get(&ip).copied()
    }

    /// Learns `ip → mac`, returning the evicted entry if the cache was full.
    pub fn insert(&mut self, ip: Ipv4Addr, mac: MacAddr) -> Option<(Ipv4Addr, MacAddr)> {
        if let Some(slot) = self.entries.get_mut(&ip) {
            *slot = mac;
            return None;
        }
        let evicted = if self.entries.len() == ARP_CACHE_CAPACITY {
            self.order
                .pop_front()
                .and_then(|old| self.entries.remove(&old).map(|m| (old, m)))
        } else {
            None
        };
        self.entries.insert(ip, mac);
        self.order.push_back(ip);
        evicted
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Hit(MacAddr),
    /// The ARP request frame to transmit.
    Miss(Vec<u8>),
}

/// One interface's ARP state: its own addresses plus the cache.
#[derive(Debug, Clone)]
pub struct ArpEndpoint {
    pub mac: MacAddr,
    pub ip: Ipv4Addr,
    pub cache: ArpCache,
}

impl ArpEndpoint {
    pub fn new(mac: MacAddr, ip: Ipv4Addr) -> Self {
        ArpEndpoint {
            mac,
            ip,
            cache: ArpCache::new(),
        }
    }

    pub fn resolve(&self, dst: Ipv4Addr) -> Resolution {
        match self.cache.lookup(dst) {
            Some(mac) => Resolution::Hit(mac),
            None => Resolution::Miss(
                ArpPacket {
                    op: ArpOp::Request,
                    sender_mac: self.mac,
                    sender_ip: self.ip,
                    target_mac: MacAddr::ZERO,
                    target_ip: dst,
                }
                .to_frame(),
            ),
        }
    }

    /// Processes a received packet. Packets addressed to this interface teach
    /// the sender's mapping; requests for this interface get a reply frame.
    pub fn handle(&mut self, packet: &ArpPacket) -> Option<Vec<u8>> {
        if packet.target_ip != self.ip {
            return None;
        }
        self.cache.insert(packet.sender_ip, packet.sender_mac);
        match packet.op {
            ArpOp::Request => Some(
                ArpPacket {
                    op: ArpOp::Reply,
                    sender_mac: self.mac,
                    sender_ip: self.ip,
                    target_mac: packet.sender_mac,
                    target_ip: packet.sender_ip,
                }
                .to_frame(),
            ),
            ArpOp::Reply => None,
        }
    }
}
