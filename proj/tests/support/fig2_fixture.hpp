#pragma once

// Forty-three flows drawn after the small published example: one scanning
// pair sweeping 26 well-known ports plus 17 benign flows among 13 other
// hosts. Expected shape: 15 hyperedges over 34 distinct destination ports.

#include <array>
#include <string>
#include <vector>

#include "hgnids/flow.hpp"

namespace fixture {

inline const std::string kScanSrc = "172.16.0.1";
inline const std::string kScanDst = "192.168.10.50";

inline constexpr std::array<std::uint16_t, 26> kScanPorts = {
    21,  22,  23,  25,  53,  80,  110, 111,  135,  139,  143,  199,  256,
    443, 445, 587, 993, 995, 1025, 1720, 1723, 3306, 3389, 5900, 8080, 8888};

inline hgnids::FlowRecord flow(std::string src, std::string dst, std::uint16_t port, bool scan) {
  hgnids::FlowRecord r;
  r.src_ip = std::move(src);
  r.dst_ip = std::move(dst);
  r.src_port = 40000;
  r.dst_port = port;
  r.protocol = (port == 53 || port == 123 || port == 137 || port == 5353) && !scan ? 17 : 6;
  r.flow_duration = scan ? 47 : 30985;
  r.tot_fwd_pkts = scan ? 1 : 2;
  r.tot_bwd_pkts = scan ? 1 : 2;
  r.tot_fwd_bytes = scan ? 0 : 68;
  r.tot_bwd_bytes = scan ? 6 : 142;
  r.flow_bytes_per_s = scan ? 139535 : 5684;
  r.flow_pkts_per_s = scan ? 42553 : 113;
  r.down_up_ratio = 1;
  r.label = scan ? hgnids::ActivityLabel::port_scan() : hgnids::ActivityLabel::benign();
  return r;
}

inline std::vector<hgnids::FlowRecord> fig2_records() {
  std::vector<hgnids::FlowRecord> out;
  for (auto p : kScanPorts) out.push_back(flow(kScanSrc, kScanDst, p, true));
  const std::string c1 = "192.168.10.3", c2 = "192.168.10.5", c3 = "192.168.10.8", c4 = "192.168.10.9",
                    c5 = "192.168.10.12", c6 = "192.168.10.14";
  const std::string s1 = "8.8.8.8", s2 = "23.15.4.10", s3 = "104.16.24.2", s4 = "91.189.89.199",
                    s5 = "52.84.12.7", s6 = "173.194.208.155", s7 = "224.0.0.251";
  const std::array<std::tuple<std::string, std::string, std::uint16_t>, 17> benign = {{
      {c1, s1, 53},    {c2, s1, 53},    {c3, s1, 53},     {c1, s2, 443},   {c4, s3, 443},
      {c5, s2, 80},    {c6, s4, 21},    {s6, c2, 35066},  {c3, s5, 123},   {c4, s7, 5353},
      {c5, s7, 5353},  {c1, c6, 137},   {s5, c3, 56344},  {s2, c1, 8613},  {s3, c4, 42154},
      {s4, c6, 55107}, {c2, s3, 443},
  }};
  for (const auto& [src, dst, port] : benign) out.push_back(flow(src, dst, port, false));
  return out;
}

}  // namespace fixture
