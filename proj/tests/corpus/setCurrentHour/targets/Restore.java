public class Restore {
    void restore(TimePicker picker) {
        Calendar calendar = Calendar.getInstance();
        picker.setCurrentHour(calendar.get(Calendar.HOUR_OF_DAY));
    }
}
