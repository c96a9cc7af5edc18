public class FromPrefs {
    private SharedPreferences prefs;
    private TimePicker picker;

    void load() {
        int stored = prefs.getInt("minute", 0);
        picker.setCurrentMinute(stored);
    }
}
