use std::net::Ipv4Addr;

use super::arp::ArpPacket;
use super::checksum::{ipv4_header_checksum, ones_complement_sum, udp_checksum};
use super::datapath::{DatapathConfig, DatapathFrame};
use super::*;

/// A decoded UDP datagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UdpFrame {
    pub headers: FrameHeaders,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Udp(UdpFrame),
    Arp {
        eth: EthernetHeader,
        packet: ArpPacket,
    },
}

/// Frame bytes (no preamble/FCS) for one UDP datagram.
pub fn encode_bytes(
    cfg: &HeaderConfig,
    payload: &[u8],
) -> Result<(FrameHeaders, Vec<u8>), CodecError> {
    if payload.len() > MAX_PAYLOAD {
        return Err(CodecError::PayloadTooLarge(payload.len()));
    }
    if cfg.dscp > 63 {
        return Err(CodecError::Length(format!(
            "DSCP {} exceeds 6 bits",
            cfg.dscp
        )));
    }
    let udp_len = (UDP_HEADER_BYTES + payload.len()) as u16;
    let total_len = IPV4_HEADER_BYTES as u16 + udp_len;
    let flags = if cfg.dont_fragment { 0b010 } else { 0 };

    let mut ip = [0u8; IPV4_HEADER_BYTES];
    ip[0] = 0x45;
    ip[1] = cfg.dscp << 2;
    ip[2..4].copy_from_slice(&total_len.to_be_bytes());
    ip[4..6].copy_from_slice(&cfg.identification.to_be_bytes());
    ip[6..8].copy_from_slice(&((flags as u16) << 13).to_be_bytes());
    ip[8] = cfg.ttl;
    ip[9] = IP_PROTO_UDP;
    ip[12..16].copy_from_slice(&cfg.src_ip.octets());
    ip[16..20].copy_from_slice(&cfg.dst_ip.octets());
    let ip_sum = ipv4_header_checksum(&ip);
    ip[10..12].copy_from_slice(&ip_sum.to_be_bytes());

    let mut segment = Vec::with_capacity(udp_len as usize);
    segment.extend_from_slice(&cfg.src_port.to_be_bytes());
    segment.extend_from_slice(&cfg.dst_port.to_be_bytes());
    segment.extend_from_slice(&udp_len.to_be_bytes());
    segment.extend_from_slice(&[0, 0]);
    segment.extend_from_slice(payload);
    let udp_sum = udp_checksum(cfg.src_ip, cfg.dst_ip, &segment);
    segment[6..8].copy_from_slice(&udp_sum.to_be_bytes());

    let mut bytes = Vec::with_capacity(ETH_HEADER_BYTES + total_len as usize);
    bytes.extend_from_slice(&cfg.dst_mac.0);
    bytes.extend_from_slice(&cfg.src_mac.0);
    bytes.extend_from_slice(&ETHERTYPE_IPV4.to_be_bytes());
    bytes.extend_from_slice(&ip);
    bytes.extend_from_slice(&segment);

    let headers = FrameHeaders {
        eth: EthernetHeader {
            dst: cfg.dst_mac,
            src: cfg.src_mac,
            vlan: None,
            ethertype: ETHERTYPE_IPV4,
        },
        ipv4: Ipv4Header {
            version: 4,
            header_length: 5,
            dscp: cfg.dscp,
            ecn: 0,
            total_length: total_len,
            identification: cfg.identification,
            flags,
            fragment_offset: 0,
            ttl: cfg.ttl,
            protocol: IP_PROTO_UDP,
            header_checksum: ip_sum,
            src: cfg.src_ip,
            dst: cfg.dst_ip,
        },
        udp: UdpHeader {
            src_port: cfg.src_port,
            dst_port: cfg.dst_port,
            length: udp_len,
            checksum: udp_sum,
        },
    };
    Ok((headers, bytes))
}

/// Encodes one datagram into datapath words.
pub fn encode_frame(
    cfg: &HeaderConfig,
    payload: &[u8],
    dp: &DatapathConfig,
) -> Result<DatapathFrame, CodecError> {
    let (_, bytes) = encode_bytes(cfg, payload)?;
    Ok(DatapathFrame::from_bytes(&bytes, dp))
}

pub fn decode_frame(frame: &DatapathFrame) -> Result<Decoded, CodecError> {
    decode_bytes(&frame.to_bytes()?)
}

fn need(bytes: &[u8], needed: usize) -> Result<(), CodecError> {
    if bytes.len() < needed {
        Err(CodecError::Truncated {
            needed,
            available: bytes.len(),
        })
    } else {
        Ok(())
    }
}

fn be16(b: &[u8], at: usize) -> u16 {
    u16::from_be_bytes([b[at], b[at + 1]])
}

fn mac(b: &[u8], at: usize) -> MacAddr {
    MacAddr(b[at..at + 6].try_into().unwrap())
}

fn ip(b: &[u8], at: usize) -> Ipv4Addr {
    Ipv4Addr::new(b[at], b[at + 1], b[at + 2], b[at + 3])
}

/// Decodes frame bytes. Bytes past the IP total length are ignored.
pub fn decode_bytes(bytes: &[u8]) -> Result<Decoded, CodecError> {
    need(bytes, ETH_HEADER_BYTES)?;
    let mut at = 12;
    let mut ethertype = be16(bytes, at);
    let mut vlan = None;
    if ethertype == ETHERTYPE_VLAN {
        need(bytes, ETH_HEADER_BYTES + VLAN_TAG_BYTES)?;
        vlan = Some(VlanTag {
            tci: be16(bytes, 14),
        });
        at += VLAN_TAG_BYTES;
        ethertype = be16(bytes, at);
    }
    let eth = EthernetHeader {
        dst: mac(bytes, 0),
        src: mac(bytes, 6),
        vlan,
        ethertype,
    };
    let body = &bytes[at + 2..];
    match ethertype {
        ETHERTYPE_IPV4 => decode_ipv4(eth, body).map(Decoded::Udp),
        ETHERTYPE_ARP => Ok(Decoded::Arp {
            eth,
            packet: ArpPacket::parse(body)?,
        }),
        other => Err(CodecError::UnsupportedEthertype(other)),
    }
}

fn decode_ipv4(eth: EthernetHeader, b: &[u8]) -> Result<UdpFrame, CodecError> {
    need(b, IPV4_HEADER_BYTES)?;
    let version = b[0] >> 4;
    let ihl = b[0] & 0x0f;
    if ones_complement_sum(0, &b[..IPV4_HEADER_BYTES]) != 0xffff {
        // A header carrying options is checksummed over its declared length.
        let declared = ihl as usize * 4;
        let with_options =
            ihl > 5 && b.len() >= declared && ones_complement_sum(0, &b[..declared]) == 0xffff;
        return Err(if with_options {
            CodecError::IpOptions(ihl)
        } else {
            CodecError::Ipv4Checksum
        });
    }
    if version != 4 {
        return Err(CodecError::IpVersion(version));
    }
    if ihl != 5 {
        return Err(CodecError::IpOptions(ihl));
    }
    let total_length = be16(b, 2);
    let flags_frag = be16(b, 6);
    let flags = (flags_frag >> 13) as u8;
    let fragment_offset = flags_frag & 0x1fff;
    if flags & 0b001 != 0 || fragment_offset != 0 {
        return Err(CodecError::Fragmented);
    }
    let protocol = b[9];
    if protocol != IP_PROTO_UDP {
        return Err(CodecError::UnsupportedProtocol(protocol));
    }
    let total = total_length as usize;
    if total < IPV4_HEADER_BYTES + UDP_HEADER_BYTES {
        return Err(CodecError::Length(format!("IP total length {total}")));
    }
    need(b, total)?;
    let ipv4 = Ipv4Header {
        version,
        header_length: ihl,
        dscp: b[1] >> 2,
        ecn: b[1] & 0x03,
        total_length,
        identification: be16(b, 4),
        flags,
        fragment_offset,
        ttl: b[8],
        protocol,
        header_checksum: be16(b, 10),
        src: ip(b, 12),
        dst: ip(b, 16),
    };
    let seg = &b[IPV4_HEADER_BYTES..total];
    let udp = UdpHeader {
        src_port: be16(seg, 0),
        dst_port: be16(seg, 2),
        length: be16(seg, 4),
        checksum: be16(seg, 6),
    };
    if udp.length as usize != seg.len() {
        return Err(CodecError::Length(format!(
            "UDP length {} but IP carries {} bytes",
            udp.length,
            seg.len()
        )));
    }
    if udp.checksum != 0 && udp_checksum(ipv4.src, ipv4.dst, seg) != udp.checksum {
        return Err(CodecError::UdpChecksum);
    }
    Ok(UdpFrame {
        headers: FrameHeaders { eth, ipv4, udp },
        payload: seg[UDP_HEADER_BYTES..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> HeaderConfig {
        HeaderConfig {
            src_mac: MacAddr([2, 0, 0, 0, 0, 1]),
            dst_mac: MacAddr([2, 0, 0, 0, 1, 2]),
            src_ip: Ipv4Addr::new(10, 0, 0, 1),
            dst_ip: Ipv4Addr::new(10, 0, 1, 2),
            src_port: 4000,
            dst_port: 4001,
            identification: 0x1234,
            ..HeaderConfig::default()
        }
    }

    #[test]
    fn empty_payload_lengths() {
        let (h, bytes) = encode_bytes(&cfg(), &[]).unwrap();
        assert_eq!(h.udp.length, 8);
        assert_eq!(h.ipv4.total_length, 28);
        assert_eq!(bytes.len(), 42);
    }

    #[test]
    fn oversize_rejected() {
        assert!(encode_bytes(&cfg(), &[0; MAX_PAYLOAD]).is_ok());
        assert_eq!(
            encode_bytes(&cfg(), &[0; MAX_PAYLOAD + 1]).unwrap_err(),
            CodecError::PayloadTooLarge(MAX_PAYLOAD + 1)
        );
    }

    #[test]
    fn round_trip_keeps_config() {
        let payload = b"hello datapath".to_vec();
        for dp in DatapathConfig::ALL {
            let f = encode_frame(&cfg(), &payload, &dp).unwrap();
            let Decoded::Udp(u) = decode_frame(&f).unwrap() else {
                panic!("not udp")
            };
            assert_eq!(u.headers.config(), cfg());
            assert_eq!(u.payload, payload);
        }
    }

    #[test]
    fn one_gig_word_count_is_byte_count() {
        let f = encode_frame(&cfg(), &[7; 100], &DatapathConfig::ONE_G).unwrap();
        assert_eq!(f.words.len(), 142);
    }

    #[test]
    fn protocol_and_ethertype_errors() {
        let (_, mut bytes) = encode_bytes(&cfg(), &[1, 2, 3]).unwrap();
        let mut tcp = bytes.clone();
        tcp[14 + 9] = 6;
        let sum = ipv4_header_checksum(&tcp[14..34]);
        tcp[24..26].copy_from_slice(&sum.to_be_bytes());
        assert_eq!(
            decode_bytes(&tcp).unwrap_err(),
            CodecError::UnsupportedProtocol(6)
        );
        bytes[12] = 0x86;
        bytes[13] = 0xdd;
        assert_eq!(
            decode_bytes(&bytes).unwrap_err(),
            CodecError::UnsupportedEthertype(0x86dd)
        );
    }

    #[test]
    fn truncated_stream() {
        let (_, bytes) = encode_bytes(&cfg(), &[9; 30]).unwrap();
        for cut in [0, 10, 20, 40, bytes.len() - 1] {
            assert!(
                matches!(
                    decode_bytes(&bytes[..cut]),
                    Err(CodecError::Truncated { .. })
                ),
                "cut {cut}"
            );
        }
    }

    #[test]
    fn payload_corruption_hits_udp_checksum() {
        let (_, mut bytes) = encode_bytes(&cfg(), &[9; 30]).unwrap();
        bytes[50] ^= 0x10;
        assert_eq!(decode_bytes(&bytes).unwrap_err(), CodecError::UdpChecksum);
    }

    #[test]
    fn vlan_tag_parsed_and_preserved() {
        let (_, bytes) = encode_bytes(&cfg(), &[5; 4]).unwrap();
        let mut tagged = bytes[..12].to_vec();
        tagged.extend_from_slice(&[0x81, 0x00, 0x20, 0x07]);
        tagged.extend_from_slice(&bytes[12..]);
        let Decoded::Udp(u) = decode_bytes(&tagged).unwrap() else {
            panic!("not udp")
        };
        assert_eq!(u.headers.eth.vlan, Some(VlanTag { tci: 0x2007 }));
        assert_eq!(u.payload, [5; 4]);
    }

    #[test]
    fn fragments_and_options_rejected() {
        let (_, bytes) = encode_bytes(&cfg(), &[1; 8]).unwrap();
        let resum = |mut b: Vec<u8>| {
            let s = ipv4_header_checksum(&b[14..34]);
            b[24..26].copy_from_slice(&s.to_be_bytes());
            b
        };
        let mut more = bytes.clone();
        more[20] |= 0x20;
        assert_eq!(
            decode_bytes(&resum(more)).unwrap_err(),
            CodecError::Fragmented
        );
        let mut opts = bytes[..34].to_vec();
        opts[14] = 0x46;
        opts.extend_from_slice(&[1, 1, 1, 0]);
        opts.extend_from_slice(&bytes[34..]);
        let total = be16(&opts, 16) + 4;
        opts[16..18].copy_from_slice(&total.to_be_bytes());
        opts[24] = 0;
        opts[25] = 0;
        let s = ones_complement_sum(0, &opts[14..38]);
        opts[24..26].copy_from_slice(&(!s).to_be_bytes());
        assert_eq!(decode_bytes(&opts).unwrap_err(), CodecError::IpOptions(6));
    }
}
