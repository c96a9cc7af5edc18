public class Service {
    private Context context;

    String id() {
        String id = ((TelephonyManager) context.getSystemService(Context.TELEPHONY_SERVICE)).getDeviceId();
        return id;
    }
}
