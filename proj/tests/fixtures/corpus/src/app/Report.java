package app;

import app.util.Strings;
import java.util.List;

public class Report {
    private final List<String> rows;

    public Report(List<String> rows) {
        this.rows = rows;
    }

    public String render(int limit) {
        StringBuilder sb = new StringBuilder(header());
        List<String> sorted = new Search(null).sortResults(rows);
        for (int i = 0; i < sorted.size() && i < limit; i++) {
            sb.append(formatRow(i, sorted.get(i)));
        }
        return sb.toString();
    }

    private String header() {
        return "Results\n" + Strings.repeat("=", 7) + "\n";
    }

    private String formatRow(int n, String row) {
        return (n + 1) + ". " + escape(row) + "\n";
    }

    public String toCsv() {
        List<String> cells = new java.util.ArrayList<>();
        for (String r : rows) {
            cells.add(escape(r));
        }
        return Strings.join(cells, ",");
    }

    static String escape(String cell) {
        return cell.contains(",") ? "\"" + cell + "\"" : cell;
    }
}
