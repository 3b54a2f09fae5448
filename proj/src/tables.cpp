#include "covertlab/tables.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "covertlab/metrics.hpp"

namespace covertlab {

std::string_view to_string(CellTag tag) {
    switch (tag) {
        case CellTag::Match: return "MATCH";
        case CellTag::Mismatch: return "MISMATCH";
        case CellTag::FixtureOnly: return "FIXTURE-ONLY";
    }
    return "?";
}

namespace {

TableCell computed_cell(std::string name, double printed, double computed,
                        double tolerance) {
    TableCell cell;
    cell.name = std::move(name);
    cell.printed = printed;
    cell.computed = computed;
    cell.tolerance = tolerance;
    cell.tag = std::fabs(computed - printed) <= tolerance ? CellTag::Match
                                                          : CellTag::Mismatch;
    return cell;
}

TableCell fixture_cell(std::string name, double printed) {
    TableCell cell;
    cell.name = std::move(name);
    cell.printed = printed;
    cell.tag = CellTag::FixtureOnly;
    return cell;
}

} // namespace

TablesReport reproduce_tables() {
    TablesReport report;
    report.capacity_formula_value = channel_capacity(16, 21);

    const double base_entropy = shannon_entropy("network");

    // Table 1: network covert channel in IPv4, T_m = 4, one row per T_s.
    {
        TableReport t1;
        t1.id = 1;
        t1.title = "Multi-trapdoor analysis of IPv4";
        const char* labels[] = {"NetworkCovertChannel-IPv4-Single",
                                "NetworkCovertChannel-IPv4-dual",
                                "NetworkCovertChannel-IPv4-triple"};
        const double printed_eta[] = {0.25, 0.5, 0.75};
        const double printed_entropy[] = {2.803, 5.606, 11.21};
        const double printed_ce[] = {0.089, 0.17, 0.358};
        for (unsigned t = 1; t <= 3; ++t) {
            TableRow row;
            row.label = labels[t - 1];
            row.algorithm = "NIL";
            row.t_max = 4;
            row.t_set = t;
            row.cells.push_back(
                computed_cell("covertness", printed_eta[t - 1], covertness_ncc(t, 4), 1e-9));
            if (t <= 2) {
                row.cells.push_back(computed_cell("entropy", printed_entropy[t - 1],
                                                  t * base_entropy, 0.01));
                row.cells.push_back(computed_cell(
                    "ce", printed_ce[t - 1],
                    ce_ratio(kPaperCapacity, t, kReportedBaseEntropy), t == 1 ? 0.001 : 0.01));
            } else {
                // The printed triple-trapdoor entropy and C/E follow no
                // printed formula; carried as fixtures.
                row.cells.push_back(fixture_cell("entropy", printed_entropy[t - 1]));
                row.cells.push_back(fixture_cell("ce", printed_ce[t - 1]));
            }
            t1.rows.push_back(std::move(row));
        }
        report.tables.push_back(std::move(t1));
    }

    // Table 2: subliminal channel in IPsec ESP. Only row 1 has a derivable
    // covertness cell (5 of 16 generator rounds, 1 of 2 ESP trapdoors).
    {
        TableReport t2;
        t2.id = 2;
        t2.title = "Multi-trapdoor analysis of the subliminal channel in IPsec";
        {
            TableRow row;
            row.label = "SubliminalChannel-IPSecESP-1";
            row.algorithm = "AES-XCBC-MAC";
            row.t_max = 2;
            row.t_set = 1;
            row.cells.push_back(
                computed_cell("covertness", 0.15, covertness_subliminal(5, 16, 1, 2), 0.01));
            row.cells.push_back(computed_cell("entropy", 2.803, base_entropy, 0.01));
            row.cells.push_back(fixture_cell("ce", 0.14));
            t2.rows.push_back(std::move(row));
        }
        const double fixture_eta[] = {0.47, 0.47};
        const double fixture_entropy[] = {4.78, 5.21};
        for (int i = 0; i < 2; ++i) {
            TableRow row;
            row.label = "SubliminalChannel-IPSecESP-" + std::to_string(i + 2);
            row.algorithm = "AES-XCBC-MAC";
            row.cells.push_back(fixture_cell("covertness", fixture_eta[i]));
            row.cells.push_back(fixture_cell("entropy", fixture_entropy[i]));
            row.cells.push_back(fixture_cell("ce", 0.35));
            t2.rows.push_back(std::move(row));
        }
        report.tables.push_back(std::move(t2));
    }

    // Table 3: network covert channel in TCP, T_m = 7. The printed C/E
    // column follows no printed formula; fixtures.
    {
        TableReport t3;
        t3.id = 3;
        t3.title = "Multi-trapdoor analysis of the network covert channel in TCP";
        const double printed_eta[] = {0.142, 0.28, 0.42};
        const double printed_entropy[] = {2.803, 5.606, 11.21};
        const double printed_ce[] = {0.14, 0.28, 0.14};
        for (unsigned t = 1; t <= 3; ++t) {
            TableRow row;
            row.label = "NetworkCovertChannel-TCP-" + std::to_string(t);
            row.algorithm = "NIL";
            row.t_max = 7;
            row.t_set = t;
            row.cells.push_back(
                computed_cell("covertness", printed_eta[t - 1], covertness_ncc(t, 7), 0.01));
            if (t <= 2) {
                row.cells.push_back(computed_cell("entropy", printed_entropy[t - 1],
                                                  t * base_entropy, 0.01));
            } else {
                row.cells.push_back(fixture_cell("entropy", printed_entropy[t - 1]));
            }
            row.cells.push_back(fixture_cell("ce", printed_ce[t - 1]));
            t3.rows.push_back(std::move(row));
        }
        report.tables.push_back(std::move(t3));
    }

    // Table 4: random-oracle subliminal channel in SSL/TLS. No embedding
    // model exists for TLS here, so every cell is a fixture.
    {
        TableReport t4;
        t4.id = 4;
        t4.title = "Multi-trapdoor analysis of the subliminal channel in SSL/TLS";
        const double fixture_eta[] = {0.25, 0.58, 0.58};
        const double fixture_entropy[] = {2.803, 3.67, 3.67};
        const double fixture_ce[] = {0.14, 0.35, 0.35};
        for (int i = 0; i < 3; ++i) {
            TableRow row;
            row.label = "SubliminalChannel(Oracle)-SSL/TLS-" + std::to_string(i + 1);
            row.algorithm = "SSLCipherSuite";
            row.cells.push_back(fixture_cell("covertness", fixture_eta[i]));
            row.cells.push_back(fixture_cell("entropy", fixture_entropy[i]));
            row.cells.push_back(fixture_cell("ce", fixture_ce[i]));
            t4.rows.push_back(std::move(row));
        }
        report.tables.push_back(std::move(t4));
    }

    return report;
}

std::string render_tables_report(const TablesReport& report) {
    std::ostringstream out;
    char buf[64];
    for (const auto& table : report.tables) {
        out << "Table " << table.id << ": " << table.title << '\n';
        for (const auto& row : table.rows) {
            out << "  " << row.label << "  t_max=";
            if (row.t_max) {
                out << *row.t_max;
            } else {
                out << '-';
            }
            out << " t_set=";
            if (row.t_set) {
                out << *row.t_set;
            } else {
                out << '-';
            }
            out << " algorithm=" << row.algorithm << '\n';
            for (const auto& cell : row.cells) {
                out << "    " << cell.name << " printed=" << cell.printed;
                if (cell.computed) {
                    std::snprintf(buf, sizeof(buf), "%.6f", *cell.computed);
                    out << " computed=" << buf << " tolerance=" << cell.tolerance;
                }
                out << " " << to_string(cell.tag) << '\n';
            }
        }
    }
    std::snprintf(buf, sizeof(buf), "%.6f", report.capacity_formula_value);
    out << "Capacity note: literal formula log2(1 + 16/21) = " << buf
        << "; reported constant paper-capacity = " << report.paper_capacity << '\n'
        << "Capacity note: the formula does not reproduce the reported constant "
           "(MISMATCH surfaced by design); table C/E cells use paper-capacity.\n";
    return out.str();
}

} // namespace covertlab
