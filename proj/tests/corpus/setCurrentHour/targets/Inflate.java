public class Inflate extends Activity {
    void bind() {
        int hour = 6;
        ((TimePicker) findViewById(R.id.tp)).setIs24HourView(true);
        ((TimePicker) findViewById(R.id.tp)).setCurrentHour(hour + 1);
    }
}
