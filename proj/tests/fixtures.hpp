// Shared model systems for the test suites: the case-study flow pair, the
// non-determinism example graph, benchmark suites at two catalog sizes, and
// small random generators for property tests.
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "flowmine/rng.hpp"
#include "flowmine/types.hpp"

namespace flowmine::testing {

using EdgeSet = std::set<std::pair<MessageId, MessageId>>;

// ---- case study ------------------------------------------------------------
// Two flows over one memory subsystem: a CPU cache read and a UART upstream
// read. 14 unique messages, 3 branches per flow, 4 shared messages
// (19, 21, 22, 23). The union causality graph additionally contains edges
// that belong to neither flow, e.g. (19, 27).

inline Catalog case_study_catalog() {
  Catalog c;
  c.add({1, "UART_0", "Bridge", "uart_rd_req"});
  c.add({2, "CPU_0", "Cache", "cpu_rd_req"});
  c.add({5, "Cache", "SRAM", "sram_rd"});
  c.add({6, "SRAM", "Cache", "sram_data"});
  c.add({15, "Cache", "MemCtrl", "mem_rd_req"});
  c.add({19, "MemCtrl", "DRAM", "dram_rd"});
  c.add({21, "MemCtrl", "SRAM", "sram_rd_req"});
  c.add({22, "SRAM", "MemCtrl", "sram_rd_data"});
  c.add({23, "DRAM", "MemCtrl", "dram_data"});
  c.add({24, "Bridge", "UART_0", "uart_rd_resp"});
  c.add({25, "MemCtrl", "Cache", "mem_rd_resp"});
  c.add({26, "Cache", "CPU_0", "cpu_rd_resp"});
  c.add({27, "Bridge", "MemCtrl", "brg_rd_req"});
  c.add({28, "MemCtrl", "Bridge", "brg_rd_resp"});
  c.add_start(1);
  c.add_start(2);
  c.add_end(24);
  c.add_end(26);
  return c;
}

// Branches: cache hit (2,5,6,26), miss via DRAM (2,15,19,23,25,26), miss via
// SRAM bank (2,15,21,22,25,26).
inline FlowSpec cpu0_read() {
  return FlowSpec("CPU0_Read", 2, {26},
                  {{2, 5},
                   {5, 6},
                   {6, 26},
                   {2, 15},
                   {15, 19},
                   {19, 23},
                   {23, 25},
                   {25, 26},
                   {15, 21},
                   {21, 22},
                   {22, 25}});
}

// Branches: direct bridge answer (1,24), fetch via DRAM
// (1,27,19,23,28,24), fetch via SRAM bank (1,27,21,22,28,24).
inline FlowSpec uart_upstream_read() {
  return FlowSpec("UART_Upstream_Read", 1, {24},
                  {{1, 24},
                   {1, 27},
                   {27, 19},
                   {19, 23},
                   {23, 28},
                   {27, 21},
                   {21, 22},
                   {22, 28},
                   {28, 24}});
}

inline std::vector<FlowSpec> case_study_flows() {
  return {cpu0_read(), uart_upstream_read()};
}

// ---- non-determinism example ----------------------------------------------
// The five-message flow whose trace (1,1,5,1,2,5,4,4,3,4) admits a full
// decomposition only if the first event takes the 1->5 branch; the greedy
// oldest-first policy takes 1->2 instead and rejects part of the trace.

inline Catalog fig_catalog() {
  Catalog c;
  c.add({1, "A", "B", "req"});
  c.add({2, "B", "C", "fwd"});
  c.add({3, "C", "D", "deep"});
  c.add({4, "D", "C", "resp"});
  c.add({5, "C", "A", "ack"});
  c.add_start(1);
  c.add_end(4);
  return c;
}

inline FlowSpec fig_flow() {
  return FlowSpec("Branch_Example", 1, {4},
                  {{1, 5}, {1, 2}, {2, 3}, {3, 4}, {5, 4}, {2, 5}});
}

inline Trace fig_trace() { return Trace{{1, 1, 5, 1, 2, 5, 4, 4, 3, 4}}; }

// ---- tiny helpers ----------------------------------------------------------

// Three-message chain A -> B -> C as a single flow; ids 1, 2, 3.
inline Catalog abc_catalog() {
  Catalog c;
  c.add({1, "A", "B", "a"});
  c.add({2, "B", "C", "b"});
  c.add({3, "C", "A", "c"});
  c.add_start(1);
  c.add_end(3);
  return c;
}

inline FlowSpec abc_flow() {
  return FlowSpec("ABC", 1, {3}, {{1, 2}, {2, 3}});
}

// ---- benchmark suites ------------------------------------------------------
// small: 22 messages = the case-study subsystem plus an SPI/flash write flow
// on disjoint units. large: 60 messages = small plus two more disjoint
// clusters (a DMA copy engine and a GPU job pipeline).

inline void add_spi_messages(Catalog& c) {
  c.add({31, "CPU_1", "SPI", "spi_wr_req"});
  c.add({32, "SPI", "Flash", "flash_cmd"});
  c.add({33, "Flash", "SPI", "flash_fast_ack"});
  c.add({34, "Flash", "SPI", "flash_busy"});
  c.add({35, "SPI", "Flash", "flash_poll"});
  c.add({36, "Flash", "SPI", "flash_ready"});
  c.add({37, "Flash", "SPI", "flash_err"});
  c.add({38, "SPI", "CPU_1", "spi_wr_resp"});
  c.add_start(31);
  c.add_end(38);
}

// Branches: fast ack, busy/poll/ready, error.
inline FlowSpec spi_write() {
  return FlowSpec("SPI_Write", 31, {38},
                  {{31, 32},
                   {32, 33},
                   {33, 38},
                   {32, 34},
                   {34, 35},
                   {35, 36},
                   {36, 38},
                   {32, 37},
                   {37, 38}});
}

inline Catalog small_suite_catalog() {
  Catalog c = case_study_catalog();
  add_spi_messages(c);
  return c;
}

inline std::vector<FlowSpec> small_suite_flows() {
  return {cpu0_read(), uart_upstream_read(), spi_write()};
}

inline void add_dma_messages(Catalog& c) {
  c.add({41, "CPU_2", "DMA", "dma_start"});
  c.add({42, "DMA", "SrcMem", "rd_burst"});
  c.add({43, "SrcMem", "DMA", "rd_data"});
  c.add({44, "DMA", "DstMem", "wr_burst"});
  c.add({45, "DstMem", "DMA", "wr_ack"});
  c.add({46, "DMA", "CPU_2", "dma_done"});
  c.add({47, "DMA", "SrcMem", "rd_single"});
  c.add({48, "SrcMem", "DMA", "rd_single_data"});
  c.add({49, "DMA", "DstMem", "wr_single"});
  c.add({50, "DstMem", "DMA", "wr_single_ack"});
  c.add({51, "DMA", "CPU_2", "dma_abort"});
  c.add_start(41);
  c.add_end(46);
  c.add_end(51);
}

// Branches: burst copy, single-beat copy, abort.
inline FlowSpec dma_copy() {
  return FlowSpec("DMA_Copy", 41, {46, 51},
                  {{41, 42},
                   {42, 43},
                   {43, 44},
                   {44, 45},
                   {45, 46},
                   {41, 47},
                   {47, 48},
                   {48, 49},
                   {49, 50},
                   {50, 46},
                   {41, 51}});
}

inline void add_gpu_messages(Catalog& c) {
  c.add({61, "Host", "GPU", "job_submit"});
  c.add({62, "GPU", "VRAM", "tex_fetch"});
  c.add({63, "VRAM", "GPU", "tex_data"});
  c.add({64, "GPU", "Host", "job_done"});
  c.add({65, "GPU", "VRAM", "buf_fetch"});
  c.add({66, "VRAM", "GPU", "buf_data"});
  c.add({67, "GPU", "Host", "job_fail"});
  c.add_start(61);
  c.add_end(64);
  c.add_end(67);
}

// Branches: texture path, buffer path, failure.
inline FlowSpec gpu_job() {
  return FlowSpec("GPU_Job", 61, {64, 67},
                  {{61, 62},
                   {62, 63},
                   {63, 64},
                   {61, 65},
                   {65, 66},
                   {66, 64},
                   {61, 67}});
}

inline void add_i2c_messages(Catalog& c) {
  c.add({71, "CPU_3", "I2C", "i2c_rd_req"});
  c.add({72, "I2C", "Sensor", "sense_cmd"});
  c.add({73, "Sensor", "I2C", "sense_data"});
  c.add({74, "I2C", "CPU_3", "i2c_rd_resp"});
  c.add({75, "Sensor", "I2C", "sense_nak"});
  c.add({76, "I2C", "Sensor", "sense_retry"});
  c.add({77, "Sensor", "I2C", "sense_late"});
  c.add({78, "I2C", "CPU_3", "i2c_rd_err"});
  c.add({79, "I2C", "Sensor", "sense_stop"});
  c.add({80, "Sensor", "I2C", "sense_stopped"});
  c.add_start(71);
  c.add_end(74);
  c.add_end(78);
}

// Branches: clean read, nak/retry recovery, stop after late data.
inline FlowSpec i2c_read() {
  return FlowSpec("I2C_Read", 71, {74, 78},
                  {{71, 72},
                   {72, 73},
                   {73, 74},
                   {72, 75},
                   {75, 76},
                   {76, 77},
                   {77, 74},
                   {72, 79},
                   {79, 80},
                   {80, 78}});
}

inline Catalog large_suite_catalog() {
  Catalog c = small_suite_catalog();  // 22
  add_dma_messages(c);                // +11 = 33
  add_gpu_messages(c);                // +7  = 40
  add_i2c_messages(c);                // +10 = 50
  // Filler peripherals bring the catalog to 60 without joining any flow;
  // their units are unique so they add isolated causality-graph nodes.
  c.add({91, "WDT", "PMU", "wdt_kick"});
  c.add({92, "PMU", "WDT", "wdt_ok"});
  c.add({93, "RTC", "PMU2", "rtc_tick"});
  c.add({94, "PMU2", "RTC", "rtc_ack"});
  c.add({95, "TempSns", "Fan", "temp_hi"});
  c.add({96, "Fan", "TempSns", "fan_on"});
  c.add({97, "Dbg", "TraceBuf", "dbg_flush"});
  c.add({98, "TraceBuf", "Dbg", "dbg_done"});
  c.add({99, "Sec", "Fuse", "fuse_rd"});
  c.add({100, "Fuse", "Sec", "fuse_val"});
  return c;
}

inline std::vector<FlowSpec> large_suite_flows() {
  return {cpu0_read(), uart_upstream_read(), spi_write(),
          dma_copy(),  gpu_job(),           i2c_read()};
}

// ---- random model generators ----------------------------------------------

// A random catalog of `n` messages over a small unit alphabet, with one start
// and one end annotation. Unit collisions are what make the causality graph
// nontrivial.
inline Catalog random_catalog(Rng& rng, std::size_t n) {
  static const char* units[] = {"U0", "U1", "U2", "U3", "U4", "U5"};
  Catalog c;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t s = rng.below(6);
    std::size_t d = rng.below(5);
    if (d >= s) ++d;  // src != dest
    c.add({static_cast<MessageId>(i + 1), units[s], units[d],
           "c" + std::to_string(i + 1)});
  }
  c.add_start(1 + static_cast<MessageId>(rng.below(n)));
  MessageId e = 1 + static_cast<MessageId>(rng.below(n));
  c.add_end(e);
  return c;
}

// A random flow DAG over fresh ids starting at `first_id`: a start node, up
// to `max_nodes - 2` interior nodes arranged in 1-3 branches, one end node.
// Returns the flow; ids used are [first_id, first_id + node_count).
inline FlowSpec random_flow(Rng& rng, MessageId first_id,
                            std::size_t max_nodes, const std::string& name) {
  std::size_t interior = max_nodes >= 3 ? rng.below(max_nodes - 2) + 1 : 1;
  std::size_t branches = rng.below(3) + 1;
  if (branches > interior) branches = interior;
  MessageId start = first_id;
  MessageId end = first_id + 1 + static_cast<MessageId>(interior);
  EdgeSet edges;
  // Deal interior nodes round-robin into branch chains.
  std::vector<std::vector<MessageId>> chain(branches);
  for (std::size_t i = 0; i < interior; ++i) {
    chain[i % branches].push_back(first_id + 1 + static_cast<MessageId>(i));
  }
  for (const auto& nodes : chain) {
    MessageId prev = start;
    for (MessageId node : nodes) {
      edges.insert({prev, node});
      prev = node;
    }
    edges.insert({prev, end});
  }
  return FlowSpec(name, start, {end}, edges);
}

// Catalog housing the nodes of `flows` with per-flow disjoint unit names, so
// generated traces parse against it.
inline Catalog catalog_for_flows(const std::vector<FlowSpec>& flows) {
  Catalog c;
  for (std::size_t f = 0; f < flows.size(); ++f) {
    const FlowSpec& flow = flows[f];
    std::string u = "F" + std::to_string(f);
    for (MessageId node : flow.nodes()) {
      // Alternate src/dest so consecutive ids chain causally if needed.
      c.add({node, u + (node % 2 ? "a" : "b"), u + (node % 2 ? "b" : "a"),
             "m" + std::to_string(node)});
    }
    c.add_start(flow.start());
    for (MessageId e : flow.ends()) c.add_end(e);
  }
  return c;
}

}  // namespace flowmine::testing
