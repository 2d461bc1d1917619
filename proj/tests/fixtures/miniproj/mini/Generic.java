package mini;

import java.io.IOException;
import java.util.List;
import java.util.Map;

public abstract class Generic<K extends Comparable<K>> {
    protected abstract K key();

    public static <T extends Comparable<? super T>> List<T> top(Map<String, List<T>> byName, int k) {
        List<T> all = byName.getOrDefault("all", List.of());
        return all.subList(0, Math.min(k, all.size()));
    }

    @SuppressWarnings("unchecked")
    public int[] counts(String... names) throws IOException, IllegalStateException {
        int[] out = new int[names.length];
        for (int i = 0; i < names.length; i++) {
            out[i] = names[i].length();
        }
        return out;
    }

    Map<K, List<Map<String, Integer>>> nested(Map<K, List<Map<String, Integer>>> in) {
        return in;
    }
}
