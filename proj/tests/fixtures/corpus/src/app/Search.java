package app;

import java.util.ArrayList;
import java.util.Collections;
import java.util.List;

public class Search {
    private final Index index;

    public Search(Index index) {
        this.index = index;
    }

    public List<String> run(String query) {
        if (!index.contains(query)) {
            return sortResults(index.lookup(query));
        }
        List<String> ranked = rank(index.lookup(query), query);
        return sortResults(ranked);
    }

    List<String> rank(List<String> hits, String query) {
        List<String> out = new ArrayList<>();
        for (String h : hits) {
            if (score(h, query) > 0) {
                out.add(h);
            }
        }
        return out;
    }

    int score(String hit, String query) {
        /* prefix matches score by length */
        return hit.startsWith(query) ? query.length() : 0;
    }

    public List<String> sortResults(List<String> results) {
        List<String> copy = new ArrayList<>(results);
        Collections.sort(copy);
        return copy;
    }
}
